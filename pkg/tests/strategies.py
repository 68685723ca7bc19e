from hypothesis import strategies as st

from bdnf.graph import Wiring


@st.composite
def wirings(draw, n_min=2, n_max=9, k_max=3, full=False):
    n = draw(st.integers(n_min, n_max))
    k = draw(st.integers(1, min(k_max, n - 1)))
    rows = []
    for v in range(n):
        others = [u for u in range(n) if u != v]
        d = k if full else draw(st.integers(0, k))
        rows.append(tuple(draw(st.permutations(others))[:d]))
    return Wiring(n, k, tuple(rows))
