import numpy as np
import pytest


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


def reference_partial_transpose(mat: np.ndarray, dims, parties) -> np.ndarray:
    """Entry-by-entry partial transpose, independent of the production code."""
    import itertools

    n = len(dims)
    out = np.empty_like(mat)
    strides = [int(np.prod(dims[k + 1 :])) for k in range(n)]

    def flat(idx):
        return sum(i * s for i, s in zip(idx, strides))

    for row in itertools.product(*[range(d) for d in dims]):
        for col in itertools.product(*[range(d) for d in dims]):
            src_row = list(row)
            src_col = list(col)
            for p in parties:
                src_row[p], src_col[p] = src_col[p], src_row[p]
            out[flat(row), flat(col)] = mat[flat(tuple(src_row)), flat(tuple(src_col))]
    return out
