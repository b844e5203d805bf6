# # Region-aware retrieval and answering
#
# Two extension bulletins give different liming advice for North Carolina
# and California. A semantic-only ranking cannot tell them apart; mixing in
# geographic proximity puts the local one first. The offline generator then
# answers from the top passage and cites it.

# +
from regionrag import (
    Document,
    FusionConfig,
    GeoPoint,
    HashEmbeddingProvider,
    OfflineStubClient,
    UserLocation,
    VectorStore,
    assemble_prompt,
    generate,
    retrieve,
)

docs = [
    Document(
        "nc-lime", "Liming in North Carolina",
        "# Liming\nApply lime in the fall so it can react before spring planting in North Carolina.",
        "extension", year=2019, region_tags=("US-NC",), centroid=GeoPoint(35.56, -79.39),
    ),
    Document(
        "ca-lime", "Liming in California",
        "# Liming\nApply lime in late summer before the rainy season in California.",
        "extension", year=2012, region_tags=("US-CA",), centroid=GeoPoint(36.78, -119.42),
    ),
]
provider = HashEmbeddingProvider(512)
store = VectorStore(provider.dim, provider.provider_id)
store.sync_documents(docs, provider)
question = "When should I apply lime to my field?"
user = UserLocation(GeoPoint(35.78, -78.64), ())
# -

# Compare the semantic-only and region-aware rankings.

for alpha in (0.0, 0.5):
    hits = retrieve(store, question, user, provider, FusionConfig(alpha=alpha, top_k=2))
    print(f"alpha={alpha}")
    for h in hits:
        print(f"  {h.chunk_id:<10} sem={h.s_semantic:.3f} dist={h.s_distance:.3f} final={h.s_final:.3f}")

# Build the prompt and answer offline.

# +
hits = retrieve(store, question, user, provider, FusionConfig(alpha=0.5, top_k=2))
bundle = assemble_prompt(question, hits)
print(bundle.rendered)
record = generate(OfflineStubClient(), bundle)
print("Answer:", record.text)
print("Citations:", record.citations)
# -
