"""Cross-check the linked LP, the multimarginal LP and brute-force enumeration.

Random small instances with masses in multiples of 1/q are solved three
ways in rational arithmetic; the optimal costs must agree exactly.

Run:  python demos/oracle_crosscheck.py [count] [seed]
"""

import sys

import numpy as np

from discrete_barycenter.oracle import compare, random_instance


def main(argv):
    count = int(argv[1]) if len(argv) > 1 else 20
    seed = int(argv[2]) if len(argv) > 2 else 0
    rng = np.random.default_rng(seed)
    agree = 0
    for idx in range(count):
        inst = random_instance(rng)
        rep = compare(inst)
        agree += rep["passed"]
        print(f"{idx:3d}  N={inst.measures.n}  sizes={list(inst.measures.sizes)}  "
              f"cost={rep['enumeration']}  {'ok' if rep['passed'] else 'MISMATCH'}")
    print(f"{agree}/{count} instances agree exactly")
    return 0 if agree == count else 1


if __name__ == "__main__":
    sys.exit(main(sys.argv))
