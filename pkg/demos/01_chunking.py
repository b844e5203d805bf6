# # Sliding-window chunking
#
# Documents are cut into windows of 300 whitespace tokens. Consecutive
# windows share 50 tokens, so a fact that straddles a boundary survives
# whole in at least one chunk. A markdown or all-caps heading is carried
# into each chunk as a "Heading: ..." line that does not count against the
# budget.

# +
from regionrag import Document, chunk_document
from regionrag.corpus import tokenize, window_spans

text = "# Liming Acid Soils\n" + " ".join(f"w{i}" for i in range(700))
doc = Document("demo-lime", "Liming Acid Soils", text, "extension", year=2019, region_tags=("US-NC",))
chunks = chunk_document(doc)
for c in chunks:
    print(c.chunk_id, c.token_span, repr(c.text[:40]))
# -

# The spans advance by 250 tokens; the last window is shorter.

print(window_spans(701, 300, 50))

# Each consecutive pair overlaps by exactly 50 tokens.

# +
a, b = chunks[0], chunks[1]
body = lambda c: tokenize(c.text.split("\n", 1)[1])
assert body(a)[-50:] == body(b)[:50]
print("overlap ok:", body(a)[-3:], body(b)[47:50])
# -

# Metadata rides along with every chunk.

print(chunks[0].metadata)
