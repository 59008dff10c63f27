import numpy as np
from hypothesis import strategies as st

angles = st.floats(0.0, 2 * np.pi, allow_nan=False)


@st.composite
def ball_points(draw, radius=0.85):
    r = draw(st.floats(0.0, radius))
    a = draw(angles)
    return np.array([r * np.cos(a), r * np.sin(a)])


@st.composite
def vectors(draw, lo=0.05, hi=5.0):
    r = draw(st.floats(lo, hi))
    a = draw(angles)
    return np.array([r * np.cos(a), r * np.sin(a)])


@st.composite
def randers_params(draw):
    """(A, b) with A symmetric positive definite and |b|_A < 0.8."""
    l1, l2 = draw(st.floats(0.3, 3.0)), draw(st.floats(0.3, 3.0))
    t = draw(angles)
    R = np.array([[np.cos(t), -np.sin(t)], [np.sin(t), np.cos(t)]])
    A = R @ np.diag([l1, l2]) @ R.T
    s = draw(st.floats(0.0, 0.8))
    u = draw(angles)
    w = np.array([np.cos(u), np.sin(u)])
    b = s * w / np.sqrt(w @ np.linalg.solve(A, w))
    return A, b
