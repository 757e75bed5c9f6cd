import numpy as np
import pytest

from jacobi_kit.catalog import catalog_structures, contact_canonical, so3_dual, standard_jacobi
from jacobi_kit.chardist import (
    DistributionProbe,
    FlowError,
    Trajectory,
    casimir_check,
    char_rank,
    conserved_drift,
    csi_probe,
    flow,
    grid,
    involutivity_check,
    numerical_rank,
    sharp_rank,
)
from jacobi_kit.expr import ONE, ZERO, Var, parse_expr
from jacobi_kit.homogenize import poissonize
from jacobi_kit.structure import PartialJacobiStructure

SO3 = so3_dual()
CASIMIR = parse_expr("x0^2 + x1^2 + x2^2", SO3.chart)


def test_numerical_rank():
    assert numerical_rank(np.eye(3)) == 3
    assert numerical_rank(np.zeros((3, 2))) == 0
    assert numerical_rank(np.array([[1.0, 2.0], [2.0, 4.0]])) == 1
    assert numerical_rank(np.zeros((3, 0))) == 0


def test_standard_rank_on_grid():
    s = standard_jacobi(1)
    for p in grid(3):
        assert char_rank(DistributionProbe(s, p)) == 3


def test_grid_shape():
    G = grid(3)
    assert G.shape == (125, 3)
    assert G.min() == -1.0 and G.max() == 1.0


def test_so3_ranks():
    assert char_rank(DistributionProbe(SO3, [1.0, 0.0, 0.0])) == 2
    assert char_rank(DistributionProbe(SO3, [0.3, -0.2, 0.5])) == 2
    assert char_rank(DistributionProbe(SO3, [0.0, 0.0, 0.0])) == 0


def test_sharp_rank_and_contact():
    s = contact_canonical(1)
    assert sharp_rank(s, [0.0, 0.0, 0.0]) == 2
    assert char_rank(DistributionProbe(s, [0.0, 0.0, 0.0])) == 3
    assert sharp_rank(standard_jacobi(1), [0.1, 0.2, 0.3]) == 2


def test_poissonized_ranks():
    # standard R^3 is transitive, so the homogeneous tensor is nondegenerate on R^4
    assert sharp_rank(poissonize(standard_jacobi(1)).structure, [0.1, 0.2, 0.3, 0.0]) == 4
    # a Poisson input keeps its rank
    assert sharp_rank(poissonize(SO3).structure, [1.0, 0.0, 0.0, 0.0]) == 2


def test_custom_family():
    probe = DistributionProbe(standard_jacobi(1), [0.0, 0.0, 0.0], [Var(1)])
    # X_{x1} = Λ(dx1, ·) = −∂2 at any point
    assert char_rank(probe) == 1
    assert np.allclose(probe.matrix()[:, 0], [0.0, 0.0, -1.0])


def test_probe_point_dimension():
    with pytest.raises(ValueError):
        DistributionProbe(SO3, [1.0, 0.0])


def test_csi_probe_flags_rank_jump():
    rep = csi_probe(SO3, [[0.0, 0.0, 0.0], [1.0, 0.0, 0.0]])
    c = rep["rank constant on probe set"]
    assert not c.passed
    assert c.witness["low_rank"] == 0 and c.witness["high_rank"] == 2
    assert csi_probe(contact_canonical(1), grid(3, 3))["rank constant on probe set"].passed


@pytest.mark.parametrize("s", catalog_structures(), ids=lambda s: s.name)
def test_involutivity_on_catalog(s):
    p = np.linspace(0.1, 0.7, s.dim)
    rep = involutivity_check(DistributionProbe(s, p))
    assert rep.passed, rep.to_text()


def test_involutivity_detects_broken_tensor():
    # standard R^3 with the x2 coefficient dropped is no longer Jacobi
    s = standard_jacobi(1)
    rows = [list(r) for r in s.lambda_sharp]
    rows[0][2], rows[2][0] = ZERO, ZERO
    bad = PartialJacobiStructure(s.chart, s.flat, rows, s.reeb)
    rep = involutivity_check(DistributionProbe(bad, [0.2, 0.4, 0.6]))
    assert not rep.passed
    failing = [c for c in rep.checks if not c.passed]
    assert all(c.name.startswith("morphism") for c in failing)
    assert "component" in failing[0].witness


# -- flows ------------------------------------------------------------------


def test_flow_of_constant_is_reeb_translation():
    s = standard_jacobi(1)
    traj = flow(s, ONE, [0.5, 0.0, 0.0], 1.0, 0.1)
    assert np.allclose(traj.final, [1.5, 0.0, 0.0], atol=1e-14)
    assert len(traj.times) == 11
    assert traj.error_estimate < 1e-14


def test_casimir_drift_so3():
    assert casimir_check(SO3, CASIMIR, Var(0))
    traj = flow(SO3, Var(0), [0.6, 0.8, 0.0], 10.0, 1e-3)
    assert conserved_drift(traj, CASIMIR) <= 1e-8


def test_rank_constant_along_so3_trajectory():
    traj = flow(SO3, parse_expr("x0 + x1*x2", SO3.chart), [0.6, 0.8, 0.1], 2.0, 1e-2)
    for p in traj.points[::20]:
        assert char_rank(DistributionProbe(SO3, p)) == 2


def test_rotation_matches_closed_form():
    # X_{x0} = Λ(dx0, ·) rotates (x1, x2) about the x0 axis
    traj = flow(SO3, Var(0), [0.6, 0.8, 0.0], 1.0, 1e-3)
    t = traj.times
    a, b = traj.points[:, 1], traj.points[:, 2]
    r = np.hypot(a, b)
    assert np.allclose(r, 0.8, atol=1e-10)
    assert np.allclose(traj.points[:, 0], 0.6)
    assert np.allclose(np.abs(np.unwrap(np.arctan2(b, a))), t, atol=1e-9)


def test_flow_blow_up_raises():
    s = standard_jacobi(1)
    # X_{x0^2} has x0' = x0^2, which leaves every bounded set before t = 1
    with pytest.raises(FlowError) as info:
        flow(s, parse_expr("x0^2", s.chart), [1.0, 0.0, 0.0], 2.0, 1e-2)
    err = info.value
    assert 0.9 < err.last_good_time < 1.2
    assert np.all(np.isfinite(err.trajectory.points))


def test_flow_argument_validation():
    with pytest.raises(ValueError):
        flow(SO3, Var(0), [1.0, 0.0, 0.0], 1.0, 0.0)
    with pytest.raises(ValueError):
        flow(SO3, Var(0), [1.0, 0.0], 1.0, 0.1)


def test_trajectory_table(tmp_path):
    traj = Trajectory([0.0, 0.5], [[1.0, 2.0], [1.0 / 3.0, 4.0]], 0.5)
    text = traj.to_table()
    rows = [line.split("\t") for line in text.splitlines()]
    assert rows[0] == ["0", "1", "2"]
    assert float(rows[1][1]) == 1.0 / 3.0
    path = tmp_path / "traj.tsv"
    traj.write(path)
    assert path.read_text() == text
    back = np.loadtxt(path)
    assert back.shape == (2, 3)


def test_trajectory_validation():
    with pytest.raises(ValueError):
        Trajectory([0.0, 0.0], [[1.0], [1.0]], 0.1)
    with pytest.raises(ValueError):
        Trajectory([0.0], [[np.nan]], 0.1)
