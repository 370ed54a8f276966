"""The support bound sum S_i - N + 1 is attained.

Take W equally weighted atoms at 0, 3, ..., 3(W-1) and a Dirac at 0.  Every
atom must travel to the Dirac on its own, so any barycenter has W atoms,
which is exactly the bound.  Solved in rational arithmetic for W = 2..8.

Run:  python demos/sparsity_tightness.py
"""

from fractions import Fraction

from discrete_barycenter import MeasureSet, dirac, make_measure, solve_barycenter, sparsify
from discrete_barycenter.sparsity import support_bound


def family(w):
    spread = make_measure([[3 * a] for a in range(w)], [Fraction(1, w)] * w, exact=True)
    return MeasureSet((spread, dirac([0], exact=True)))


def main():
    print(" W  bound  support  atoms                      cost")
    for w in range(2, 9):
        ms = family(w)
        sp = sparsify(solve_barycenter(ms), ms)
        atoms = " ".join(str(p[0]) for p in sp.barycenter.points)
        print(f"{w:2d}  {support_bound(ms):5d}  {sp.support_size:7d}  {atoms:<25}  {sp.total_cost}")


if __name__ == "__main__":
    main()
