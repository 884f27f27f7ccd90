"""Independent reference computations used to freeze expected values."""

import bisect
import math
from fractions import Fraction


def min_cover_bruteforce(intervals, eps):
    """Exhaustive minimum number of closed length-eps intervals covering a union.

    Everything is scaled to integers.  The union is then exactly the set of
    its integer points plus the open unit cells between them, encoded at
    doubled coordinates (point p -> 2p, cell (j, j+1) -> 2j+1).  A cover
    placed at integer s holds the items in [2s, 2(s+eps)].  The search
    branches over every placement that covers the leftmost uncovered item,
    so it does not assume any particular placement rule.
    """
    fr = [(Fraction(a), Fraction(b)) for a, b in intervals]
    eps = Fraction(eps)
    scale = math.lcm(eps.denominator, *(x.denominator for ab in fr for x in ab))
    # half-steps too, so placements at half-integers are also tried
    scale *= 2
    E = int(eps * scale)
    items = set()
    for a, b in fr:
        A, B = int(a * scale), int(b * scale)
        for p in range(A, B + 1):
            items.add(2 * p)
        for j in range(A, B):
            items.add(2 * j + 1)
    items = sorted(items)
    if not items:
        return 0

    # best[i]: fewest covers for items[i:], filled right to left
    best = [0] * (len(items) + 1)
    for i in range(len(items) - 1, -1, -1):
        x = items[i]
        options = []
        for s in range(math.ceil((x - 2 * E) / 2), x // 2 + 1):
            j = bisect.bisect_right(items, 2 * (s + E), lo=i)
            options.append(1 + best[j])
        best[i] = min(options)
    return best[0]


def middle_thirds_level(k):
    """Level-k middle-thirds intervals by the textbook recursion."""
    ivs = [(Fraction(0), Fraction(1))]
    for _ in range(k):
        nxt = []
        for a, b in ivs:
            t = (b - a) / 3
            nxt += [(a, a + t), (b - t, b)]
        ivs = nxt
    return ivs


def uniform_cantor_partial(n, c, k):
    """log N_k / -log(interior gaps + children) at level k+1, telescoped by hand.

    For constant (n, c) with zero end gaps the interior gaps plus children
    fill the whole parent of length c^k, so the quotient is k log n / (-k log c).
    """
    return (k * math.log(n)) / (-k * math.log(c)) if k else 0.0


def dim_one_ratio(k, n=2, power=2):
    return (1 - Fraction(1, (k + 1) ** power)) / n
