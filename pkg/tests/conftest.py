import numpy as np
from hypothesis import settings, strategies as st

from stabpovm.pauli import PauliString

settings.register_profile("default", deadline=None, max_examples=60)
settings.load_profile("default")


@st.composite
def pauli_strings(draw, n=None, max_n=4):
    n = draw(st.integers(1, max_n)) if n is None else n
    x = draw(st.integers(0, (1 << n) - 1))
    z = draw(st.integers(0, (1 << n) - 1))
    return PauliString(n, x, z, draw(st.integers(0, 3)))


def gf2_matrix(rows, ncols):
    return np.array([[(r >> j) & 1 for j in range(ncols)] for r in rows], dtype=np.int64).reshape(-1, ncols)


def gf2_rank_numpy(rows, ncols):
    a = gf2_matrix(rows, ncols) % 2
    r = 0
    for c in range(ncols):
        piv = next((i for i in range(r, a.shape[0]) if a[i, c]), None)
        if piv is None:
            continue
        a[[r, piv]] = a[[piv, r]]
        for i in range(a.shape[0]):
            if i != r and a[i, c]:
                a[i] ^= a[r]
        r += 1
    return r


def random_stabilizer(n, seed, signs=True):
    """Maximal signed group from a random Clifford applied to |0...0>, with random signs."""
    from stabpovm.circuits import evolve_paulis, random_clifford
    from stabpovm.groups import canonicalize

    rng = np.random.default_rng(seed)
    gens = evolve_paulis(random_clifford(n, seed=int(rng.integers(2 ** 31))),
                         [PauliString.single(n, q, "Z") for q in range(n)])
    if signs:
        gens = [g.with_sign(int(rng.choice([-1, 1])) * g.sign) for g in gens]
    return canonicalize(gens, signed=True, n=n)


def random_abelian(t, seed):
    """Random abelian subgroup on t qubits: a random subset of a random stabilizer group."""
    from stabpovm.groups import canonicalize

    rng = np.random.default_rng(seed)
    s = random_stabilizer(t, seed, signs=False)
    k = int(rng.integers(0, t + 1))
    keep = [s.element(int(rng.integers(1 << t))) for _ in range(k)]
    return canonicalize([g.projective().lift() for g in keep], n=t)


# one line per acceptance criterion, printed at the end of the run
ACCEPTANCE = {}


def record(criterion, ok, detail):
    ACCEPTANCE[criterion] = (bool(ok), detail)


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for k in sorted(ACCEPTANCE):
        ok, detail = ACCEPTANCE[k]
        terminalreporter.write_line(f"C{k} {'PASS' if ok else 'FAIL'}  {detail}")
