import hypothesis.strategies as st
from hypothesis import settings

from streamclucd.lossy import ClusterHistogram, at_bucket_boundary, observe, prune

settings.register_profile("ci", deadline=None)
settings.load_profile("ci")


def tokens(alphabet="abcd"):
    return st.sampled_from(list(alphabet))


def records(m, alphabet="abcd"):
    return st.tuples(*[tokens(alphabet) for _ in range(m)])


@st.composite
def record_sets(draw, min_size=1, max_size=200, max_m=5, alphabet="abcd"):
    m = draw(st.integers(1, max_m))
    rows = draw(st.lists(records(m, alphabet), min_size=min_size, max_size=max_size))
    y = draw(records(m, alphabet))
    return rows, y


def stream_into(values, params, hist=None):
    """Run a single-attribute value stream through insertion and boundary pruning."""
    hist = hist or ClusterHistogram.empty(1)
    for v in values:
        hist.size += 1
        observe(hist, 0, v, params)
        if at_bucket_boundary(hist, params):
            prune(hist, params)
    return hist


def absorb_all(rows, params):
    """Build one cluster histogram from whole records, the way the clusterer does."""
    hist = ClusterHistogram.empty(len(rows[0]))
    for r in rows:
        hist.size += 1
        for j, v in enumerate(r):
            if v is not None:
                observe(hist, j, v, params)
        if at_bucket_boundary(hist, params):
            prune(hist, params)
    return hist
