from hypothesis import strategies as st

from bondlab.graph import Graph


@st.composite
def graphs(draw, min_n=1, max_n=8):
    n = draw(st.integers(min_n, max_n))
    pairs = [(u, v) for u in range(n) for v in range(u + 1, n)]
    keep = draw(st.lists(st.booleans(), min_size=len(pairs), max_size=len(pairs)))
    return Graph.from_edges(n, [e for e, k in zip(pairs, keep) if k])


@st.composite
def graphs_with_r(draw, min_n=1, max_n=8):
    g = draw(graphs(min_n, max_n))
    r = draw(st.integers(1, g.n))
    return g, r
