import numpy as np

# Rows per block for streamed reductions; bounds temporaries to a few MB.
BLOCK_ROWS = 4096


class CompensatedSum:
    """Elementwise Neumaier summation of equally shaped float64 arrays.

    Block partials come from BLAS / pairwise reductions; the compensation
    keeps the error of the cross-block sum independent of the block count.
    """

    def __init__(self, shape):
        self.total = np.zeros(shape, dtype=np.float64)
        self._comp = np.zeros(shape, dtype=np.float64)

    def add(self, part):
        part = np.asarray(part, dtype=np.float64)
        t = self.total + part
        big = np.abs(self.total) >= np.abs(part)
        self._comp += np.where(big, (self.total - t) + part, (part - t) + self.total)
        self.total = t

    def value(self):
        return self.total + self._comp


def iter_blocks(n, block=BLOCK_ROWS):
    for start in range(0, n, block):
        yield start, min(start + block, n)

