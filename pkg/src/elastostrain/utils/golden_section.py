"""Golden-section search for the maximum of a scalar function on an interval."""
import math
from typing import Callable, List, Tuple

INV_PHI = (math.sqrt(5) - 1) / 2  # 1 / phi
INV_PHI_SQUARE = (3 - math.sqrt(5)) / 2  # 1 / phi^2


def golden_section_maximize(
    f: Callable[[float], float], a: float, b: float, iterations: int
) -> Tuple[float, float, List[Tuple[float, float]]]:
    """
    Shrink [a, b] around a maximum of `f` for a fixed number of iterations.

    Every evaluated point is returned, so callers can keep the best value seen even when `f`
    is not unimodal on the interval.

    >>> x, fx, seen = golden_section_maximize(lambda t: -(t - 0.3) ** 2, 0.0, 1.0, 30)
    >>> round(x, 4), len(seen)
    (0.3, 31)

    :param f: function to maximise
    :param a: interval start
    :param b: interval end
    :param iterations: number of interval reductions; each costs one evaluation
    :return: (best x, f(best x), all (x, f(x)) pairs evaluated)
    """
    a, b = min(a, b), max(a, b)
    h = b - a
    c = a + INV_PHI_SQUARE * h
    d = a + INV_PHI * h
    yc = f(c)
    yd = f(d)
    seen = [(c, yc), (d, yd)]
    for _ in range(max(0, iterations - 1)):
        if yc > yd:
            b = d
            d = c
            yd = yc
            h = INV_PHI * h
            c = a + INV_PHI_SQUARE * h
            yc = f(c)
            seen.append((c, yc))
        else:
            a = c
            c = d
            yc = yd
            h = INV_PHI * h
            d = a + INV_PHI * h
            yd = f(d)
            seen.append((d, yd))
    best_x, best_f = max(seen, key=lambda p: p[1])
    return best_x, best_f, seen
