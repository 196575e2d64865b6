"""Time the compiled statevector kernels against the numpy fallback.

femvqe.quantum ships two interchangeable kernel sets: the Cython extension
(_kernels) and a pure-numpy module (_kernels_py) that serves as the fallback
when no compiler is available (FEMVQE_PURE_PYTHON=1 forces it).  Both are
imported here directly so a single process can drive them side by side; the
package-level backend selection is not involved.

For each qubit count the table reports the per-call time of every gate
kernel, one mixed-word Pauli expectation, and a depth-2 hardware-efficient
circuit, which is the gate mix a single VQE cost evaluation executes.

    python3 benchmarks/bench_kernels.py
    python3 benchmarks/bench_kernels.py --qubits 6,10,12 --repeats 9
"""

import argparse
import time

import numpy as np

from femvqe.quantum import _kernels_py
from femvqe.quantum.ansatz import build_ansatz
from femvqe.quantum.statevector import MAX_QUBITS

try:
    from femvqe.quantum import _kernels
except ImportError:
    _kernels = None

# Per-sample kernel invocations scale so every sample touches about the same
# number of amplitudes regardless of N; the circuit entry divides this by its
# own gate count.
BASE_CALLS = 1 << 17


def random_state(n, seed=7):
    rng = np.random.default_rng(seed)
    amps = rng.normal(size=1 << n) + 1j * rng.normal(size=1 << n)
    amps /= np.linalg.norm(amps)
    return np.ascontiguousarray(amps, dtype=np.complex128)


def mixed_word_masks(n):
    """Masks for a word with X on even qubits, Z on odd, qubit 0 made Y."""
    flip = sum(1 << q for q in range(0, n, 2))
    phase = sum(1 << q for q in range(1, n, 2)) | 1
    return flip, phase, 1


def make_ops(n):
    """(label, weight, fn) triples; weight = kernel calls per invocation."""
    q = n // 2
    c, t = 0, n - 1  # worst-case stride for the two-qubit kernels
    flip, phase, n_y = mixed_word_masks(n)
    ansatz = build_ansatz(n, 2, "CZ")
    theta = np.random.default_rng(3).uniform(-np.pi, np.pi, ansatz.n_params)

    def circuit(mod, amps):
        for g in ansatz.gate_sequence:
            if g.kind == "Ry":
                mod.apply_ry(amps, n, g.qubits[0], theta[g.slot])
            elif g.kind == "Rz":
                mod.apply_rz(amps, n, g.qubits[0], theta[g.slot])
            else:
                mod.apply_cz(amps, n, g.qubits[0], g.qubits[1])

    n_gates = len(ansatz.gate_sequence)
    return [
        ("Ry", 1, lambda mod, amps: mod.apply_ry(amps, n, q, 0.37)),
        ("Rz", 1, lambda mod, amps: mod.apply_rz(amps, n, q, 0.37)),
        ("CX", 1, lambda mod, amps: mod.apply_cx(amps, n, c, t)),
        ("CZ", 1, lambda mod, amps: mod.apply_cz(amps, n, c, t)),
        ("CRX", 1, lambda mod, amps: mod.apply_crx(amps, n, c, t, 0.37)),
        ("pauli expectation", 1,
         lambda mod, amps: mod.pauli_expectation(amps, n, flip, phase, n_y)),
        (f"circuit d=2 ({n_gates} gates)", n_gates, circuit),
    ]


def best_per_call(fn, mod, amps, calls, repeats):
    """Minimum over `repeats` samples of the mean per-call time."""
    best = float("inf")
    for _ in range(repeats):
        t0 = time.perf_counter()
        for _ in range(calls):
            fn(mod, amps)
        best = min(best, (time.perf_counter() - t0) / calls)
    return best


def cross_check(n=5):
    """Both kernel sets must produce identical states and expectations."""
    ref, alt = random_state(n), random_state(n)
    for _, _, fn in make_ops(n):
        fn(_kernels_py, ref)
        fn(_kernels, alt)
    assert np.allclose(ref, alt, atol=1e-12), "kernel implementations disagree"
    flip, phase, n_y = mixed_word_masks(n)
    a = _kernels_py.pauli_expectation(ref, n, flip, phase, n_y)
    b = _kernels.pauli_expectation(alt, n, flip, phase, n_y)
    assert abs(a - b) < 1e-12, f"expectation mismatch: {a} vs {b}"


def fmt(seconds):
    if seconds < 1e-3:
        return f"{seconds * 1e6:9.2f} us"
    return f"{seconds * 1e3:9.2f} ms"


def main(argv=None):
    ap = argparse.ArgumentParser(
        description="compare the compiled statevector kernels with the numpy fallback")
    ap.add_argument("--qubits", default="4,8,12",
                    help="comma-separated qubit counts (default 4,8,12)")
    ap.add_argument("--repeats", type=int, default=5,
                    help="timing samples per op; the best is kept (default 5)")
    args = ap.parse_args(argv)

    sizes = sorted({int(tok) for tok in args.qubits.split(",")})
    for n in sizes:
        if not 2 <= n <= MAX_QUBITS:
            ap.error(f"qubit counts must be in [2, {MAX_QUBITS}], got {n}")

    print(f"statevector kernel benchmark (numpy {np.__version__})")
    if _kernels is None:
        print("compiled extension not importable; timing the numpy fallback only")
    else:
        cross_check()
        print("cross-check ok: both kernel sets agree to 1e-12 on a 5-qubit workload")

    for n in sizes:
        print(f"\nN = {n}  (dim {1 << n}, state {16 * (1 << n) / 1024:.1f} KiB)")
        header = f"  {'op':<22} {'numpy':>12}"
        if _kernels is not None:
            header += f" {'cython':>12} {'speedup':>9}"
        print(header)
        for label, weight, fn in make_ops(n):
            calls = max(1, BASE_CALLS // ((1 << n) * weight))
            amps = random_state(n)
            t_py = best_per_call(fn, _kernels_py, amps, calls, args.repeats)
            line = f"  {label:<22} {fmt(t_py)}"
            if _kernels is not None:
                amps = random_state(n)
                t_cy = best_per_call(fn, _kernels, amps, calls, args.repeats)
                line += f" {fmt(t_cy)} {t_py / t_cy:>8.1f}x"
            print(line)


if __name__ == "__main__":
    main()
