"""Ten (prediction, reference) pairs covering the metric edge cases."""

CASES = [
    ("apply lime in fall", "apply lime"),
    ("Apply lime.", "apply lime"),
    ("apply lime", "apply gypsum"),
    ("", ""),
    ("The pH is 6.5.", "raise the pH to 6.5 in spring"),
    ("a c d", "a b c d"),
    ("side dress nitrogen at V6 with 40 pounds per acre", "Side-dress 40 pounds of nitrogen per acre at V6."),
    ("irrigate every 5 days", "irrigate every 5 days during peak water demand in July"),
    ("scout weekly for aphids and thrips on cotton seedlings", "thrips damage cotton seedlings; scout weekly"),
    ("plant when soil reaches 65 degrees", "no overlap here whatsoever"),
]
