import pytest

from hkworkbench.colength import (
    ColengthCache,
    IdealSpec,
    NotPrimaryError,
    colength,
    colength_diagonal,
    colength_naive,
    diagonal_data,
    graded_piece_dim,
    parse_ideal,
    safety_bound,
    write_degree_csv,
)
from hkworkbench.gradedring import InvalidPowerError, hilbert_function, parse_ring

PLANE = "p=2;vars=x,y"
FERMAT7 = "p=7;vars=x,y,z;rel=x^3+y^3+z^3"


def setup(ring_text, ideal_text):
    R = parse_ring(ring_text)
    return R, parse_ideal(ideal_text, R)


def test_graded_piece_examples():
    R, I = setup(PLANE, "x,y")
    assert graded_piece_dim(R, I, 2, 2) == 1
    assert graded_piece_dim(R, I, 2, 3) == 0
    R, I = setup(FERMAT7, "x,y,z")
    assert graded_piece_dim(R, I, 7, 3) == 9 == hilbert_function(R, 3)


def test_colength_examples():
    R, I = setup(PLANE, "x,y")
    res = colength(R, I, 4)
    assert res.per_degree == (1, 2, 3, 4, 3, 2, 1, 0)
    assert res.total == 16 and res.m_stop == 7
    R, I = setup("p=2;vars=x,y", "x^2,y^3")
    assert colength(R, I, 2).total == 24
    R, I = setup(FERMAT7, "x,y,z")
    assert colength(R, I, 7, method="sparse") == colength_naive(R, I, 7)


@pytest.mark.parametrize("q", [2, 4, 8])
def test_naive_agrees_plane(q):
    R, I = setup(PLANE, "x,y")
    assert colength(R, I, q) == colength_naive(R, I, q)


@pytest.mark.parametrize(
    "ring,ideal,qs",
    [
        ("p=5;vars=x,y,z;rel=x^3+y^3+z^3", "x,y,z", [5]),
        ("p=2;vars=x,y,z;rel=x^4+y^4+z^4+x^2*y^2+x*y*z^2+y*z^3", "x,y,z", [2, 4]),
        ("p=3;vars=x,y,z;rel=y^2*z-x^3-x*z^2", "x,y,z", [3, 9]),
        ("p=3;vars=x,y,z;rel=y^2*z-x^3-x*z^2", "x^2,y,z", [3]),
        ("p=5;vars=x,y,z;rel=x*y-z^2", "x,y", [5]),
        ("p=2;vars=x,y", "x^2+y^2,x*y", [2, 4]),
    ],
)
def test_naive_agrees_curves(ring, ideal, qs):
    R, I = setup(ring, ideal)
    for q in qs:
        assert colength(R, I, q, method="sparse", audit=True) == colength_naive(R, I, q)


@pytest.mark.parametrize(
    "ring,ideal,qs",
    [
        (FERMAT7, "x,y,z", [7, 49]),
        ("p=2;vars=x,y,z;rel=x^3+y^3+z^3", "x,y,z", [2, 4, 8, 16]),
        ("p=5;vars=x,y,z;rel=x^4+2*y^4+3*z^4", "x^2,y,z^3", [5, 25]),
        ("p=3;vars=x,y,z;rel=x^2+y^2+z^2", "y^2,x,z", [3, 9]),
        ("p=11;vars=x,y,z;rel=x^5-y^5+z^5", "x,y,z", [11]),
    ],
)
def test_diagonal_path_matches_sparse(ring, ideal, qs):
    R, I = setup(ring, ideal)
    assert diagonal_data(R, I) is not None
    for q in qs:
        assert colength_diagonal(R, I, q) == colength(R, I, q, method="sparse")


def test_diagonal_data_rejects_other_shapes():
    R, I = setup("p=3;vars=x,y,z;rel=y^2*z-x^3-x*z^2", "x,y,z")
    assert diagonal_data(R, I) is None
    R, I = setup(FERMAT7, "x+y,y,z")
    assert diagonal_data(R, I) is None
    R, I = setup(FERMAT7, "x,y")
    assert diagonal_data(R, I) is None
    with pytest.raises(ValueError):
        colength_diagonal(R, I, 7)


@pytest.mark.parametrize("a,b", [(1, 2), (2, 3), (3, 4), (2, 2)])
@pytest.mark.parametrize("p,e_max", [(2, 4), (3, 3)])
def test_monomial_staircase(a, b, p, e_max):
    R, I = setup(f"p={p};vars=x,y", f"x^{a},y^{b}")
    for e in range(1, e_max + 1):
        assert colength(R, I, p**e).total == a * b * p ** (2 * e)


def test_base_change_invariance():
    for ring, ideal, qs in [
        ("vars=x,y", "x^2+y^2,x*y", [2, 4]),
        ("vars=x,y,z;rel=x^3+y^3+z^3", "x,y,z", [2, 4]),
        ("vars=x,y,z;rel=y^2*z+x*y*z-x^3", "x,y,z", [2]),
    ]:
        small = parse_ring(f"p=2;{ring}")
        big = parse_ring(f"p=2;ext=2;{ring}")
        for q in qs:
            assert colength(small, parse_ideal(ideal, small), q).total == colength(big, parse_ideal(ideal, big), q).total


def test_extension_field_naive_agrees():
    R = parse_ring("p=2;ext=2;vars=x,y,z;rel=x^3+[0,1]*y^3+z^3")
    I = parse_ideal("x,y,z", R)
    assert colength(R, I, 2) == colength_naive(R, I, 2)


def test_monotone_truncation():
    R, I = setup("p=3;vars=x,y,z;rel=y^2*z-x^3-x*z^2", "x^2,y,z")
    res = colength(R, I, 9, method="sparse")
    assert all(0 <= d <= hilbert_function(R, m) for m, d in enumerate(res.per_degree))
    assert res.per_degree[-1] == 0 and res.total == sum(res.per_degree)


def test_not_primary():
    R, I = setup("p=3;vars=x,y", "x,x*y")
    with pytest.raises(NotPrimaryError) as exc:
        colength(R, I, 3)
    assert exc.value.bound == safety_bound(R, I, 3)
    with pytest.raises(NotPrimaryError):
        colength_naive(R, I, 3)


def test_q_must_be_power_of_p():
    R, I = setup(FERMAT7, "x,y,z")
    with pytest.raises(InvalidPowerError):
        colength(R, I, 6)


def test_ideal_needs_two_homogeneous_generators():
    R = parse_ring(PLANE)
    with pytest.raises(ValueError):
        parse_ideal("x", R)
    with pytest.raises(ValueError):
        parse_ideal("x+y^2,y", R)


def test_threads_do_not_change_results():
    R, I = setup("p=3;vars=x,y,z;rel=y^2*z-x^3-x*z^2", "x,y,z")
    assert colength(R, I, 9, threads=1) == colength(R, I, 9, threads=4)


def test_cache_round_trip(tmp_path):
    R, I = setup("p=3;vars=x,y,z;rel=y^2*z-x^3-x*z^2", "x,y^2,z")
    cache = ColengthCache(tmp_path)
    first = colength(R, I, 9, cache=cache)
    files = sorted(tmp_path.rglob("*"))
    assert files
    record = next(f for f in files if f.is_file()).read_text().splitlines()
    assert record[0].startswith("# ") and record[1].isdigit()
    assert colength(R, I, 9, cache=cache) == first
    # a poisoned record would show up, proving the cache is actually read
    m = first.q  # some degree at or above the first generator degree
    cache.put(R, I, 9, m, 12345)
    assert colength(R, I, 9, cache=cache).per_degree[m] == 12345


def test_write_degree_csv(tmp_path):
    R, I = setup(PLANE, "x,y")
    path = tmp_path / "deg.csv"
    write_degree_csv([(1, colength(R, I, 2))], path)
    assert path.read_text().splitlines() == ["e,q,m,dim", "1,2,0,1", "1,2,1,2", "1,2,2,1", "1,2,3,0"]


def test_ideal_spec_degrees():
    R = parse_ring(FERMAT7)
    I = IdealSpec((R.parse("x^2"), R.parse("y"), R.parse("z^3")))
    assert I.degrees == (2, 1, 3)


def test_fermat_cubic_q343_both_paths():
    R, I = setup(FERMAT7, "x,y,z")
    sparse = colength(R, I, 343, method="sparse")
    assert sparse == colength_diagonal(R, I, 343)
    assert sparse.total == 264709
