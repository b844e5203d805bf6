# # Geographic proximity scores
#
# A passage's locality is the great-circle distance between the user and the
# passage centroid, expressed in thousands of km and squashed with
# 1 / (1 + d). A shared region tag counts as zero distance. When either side
# has no location the passage is treated as half the globe away.

# +
import numpy as np

from regionrag import GeoPoint, RegionTag, UserLocation, haversine_km, normalize_distance, s_distance
from regionrag import ChunkMetadata
from regionrag.geo import user_doc_distance

raleigh = GeoPoint(35.7796, -78.6382)
fresno = GeoPoint(36.7378, -119.7871)
km = haversine_km(raleigh, fresno)
print(f"Raleigh to Fresno: {km:.1f} km, s_distance = {s_distance(normalize_distance(km)):.4f}")
# -

# The score decays smoothly: 1 at the user's location, 0.5 at 1000 km.

for d in np.array([0, 250, 500, 1000, 2000, 5000, 20015]):
    print(f"{d:>6} km -> {s_distance(d / 1000):.4f}")

# Region tags override geometry.

# +
def meta(regions, centroid):
    return ChunkMetadata("doc", "extension", 2020, regions, centroid, ())


user = UserLocation(raleigh, (RegionTag("US-NC"),))
print("tag match:   ", user_doc_distance(user, meta((RegionTag("US-NC"),), fresno)))
print("geometry:    ", round(user_doc_distance(user, meta((), fresno)), 1))
print("no location: ", user_doc_distance(UserLocation(None, ()), meta((), fresno)))
# -
