"""Smoke test for the qreading extension module.

Build and install first, e.g.
    pip install --no-build-isolation ./crates/py
then run
    python python/smoke_test.py
"""

import math

import qreading as q


def main():
    print("reference table")
    for m, n_s, r0, r1, n_b, printed in q.reference_table():
        rep = q.gain(q.MemoryModel(r0, r1, n_b), m, n_s)
        print(f"  M={m:<7} N_S={n_s:<5} r0={r0:<6} r1={r1:<5} N_B={n_b:<5} G={rep.gain:.4e} (printed {printed})")
        assert rep.q_bound <= rep.c_bound

    p = q.critical_m_worst_case(0.0, 0.1)
    print(f"critical M at r0=0, N_S=0.1: {p.m_int} (real root {p.m_real:.6f}, worst N_B {p.n_b_worst:.4g})")
    assert p.m_int == 7

    m_tilde = q.asymptote_high_energy(1.0)
    assert abs(m_tilde - math.log(2) / (2 * math.log(2) - 1)) < 1e-12

    cell = q.certify_cell(q.MemoryModel(0.0, 0.7, 0.1), 0.5)
    print(f"oracle cell: dim={cell['dim']} worst |gaussian - fock| = {cell['worst_abs_error']:.2e}")
    assert cell["passes"]

    try:
        q.MemoryModel(0.5, 0.2, 0.0)
    except ValueError as e:
        print(f"rejected bad memory: {e}")
    else:
        raise AssertionError("r1 < r0 accepted")

    print("smoke test ok")


if __name__ == "__main__":
    main()
