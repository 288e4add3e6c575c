from collections.abc import Sequence

import numpy as np

from ..errors import PreconditionError
from ..genotype import TestSuite, distance_matrix
from ..landscape import diameters


def most_distant_indices(matrix: np.ndarray, k: int) -> list[int]:
    """Greedy farthest-point selection on a distance matrix.

    Starts from the farthest pair, then keeps adding the candidate whose
    nearest selected member is farthest away. Ties go to the lowest index.
    Returns the selected indices in ascending order.
    """
    n = len(matrix)
    if not 1 <= k <= n:
        raise PreconditionError(f'k must be in [1, {n}], got {k}')
    if k == 1:
        return [0]
    masked = matrix.astype(np.int64, copy=True)
    np.fill_diagonal(masked, -1)
    i, j = np.unravel_index(int(np.argmax(masked)), masked.shape)
    selected = [int(min(i, j)), int(max(i, j))]
    nearest = np.minimum(matrix[selected[0]], matrix[selected[1]]).astype(np.int64)
    nearest[selected] = -1
    while len(selected) < k:
        pick = int(np.argmax(nearest))
        selected.append(pick)
        nearest = np.minimum(nearest, matrix[pick])
        nearest[selected] = -1
    return sorted(selected)


def select_most_distant(candidates: Sequence[TestSuite], k: int) -> list[TestSuite]:
    return [candidates[i] for i in most_distant_indices(distance_matrix(candidates), k)]


def calculate_diversity(P: Sequence[TestSuite], matrix: np.ndarray | None = None) -> float:
    """Average population diameter."""
    if len(P) < 2:
        raise PreconditionError(f'diversity needs at least 2 individuals, got {len(P)}')
    return diameters(P, matrix)[1]


def duplicate_free_indices(matrix: np.ndarray) -> list[int]:
    """First occurrence of every distance-0 class, in input order."""
    return [i for i in range(len(matrix)) if not np.any(matrix[i, :i] == 0)]


def remove_duplicates(pool: Sequence[TestSuite]) -> list[TestSuite]:
    if len(pool) < 2:
        return list(pool)
    return [pool[i] for i in duplicate_free_indices(distance_matrix(pool))]
