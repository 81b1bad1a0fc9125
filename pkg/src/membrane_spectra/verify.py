"""End-to-end evaluation of the two eigenvalue inequalities.

For a surface-plus-map instance this module computes the first Dirichlet
eigenvalue, the first two nonzero Neumann eigenvalues, the area and the
covering degree, then checks

    (1/lambda1 + 1/mu1 + 1/mu2) / A  >=  3 / (4 pi d)          (reciprocal form)
    lambda1 * mu1 * A  <=  d * (4 pi / 3) * (2 lambda1 + mu1)  (product form)

and replays the underlying trial-function argument: the balanced
transplants give a sum of reciprocal Rayleigh quotients sandwiched
between A / (d * 4 pi / 3) and the true reciprocal sum.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field

import numpy as np

from . import fem
from .balance import BalanceResult, balance_center_of_mass, center_of_gravity
from .mesh import MapSample, SurfaceMesh
from .transplant import compute_degree, transplant_coords

FOUR_PI_3 = 4.0 * np.pi / 3.0

CSV_FIELDS = [
    "fixture", "level", "mesh_resolution", "area", "degree",
    "lambda1", "mu1", "mu2",
    "lhs2", "rhs2", "slack2", "lhs3", "rhs3", "slack3",
    "trial_sum", "balance_residual", "balance_iterations",
    "eps_slack2", "eps_slack3", "eps_upper", "eps_lower",
]


@dataclass
class VerificationReport:
    """Eigenvalues, inequality sides, and slacks for one instance."""

    lambda1: float
    mu1: float
    mu2: float
    area: float
    degree: int
    lhs2: float
    rhs2: float
    slack2: float
    lhs3: float
    rhs3: float
    slack3: float
    trial_sum: float
    mesh_resolution: str
    balance: BalanceResult | None = None
    dirichlet_residuals: list = field(default_factory=list)
    neumann_residuals: list = field(default_factory=list)
    eps_fem: dict | None = None       # two-level Richardson budget per margin
    failure: str | None = None

    # margins that must be nonnegative up to the discretization budget
    def margin_upper(self) -> float:
        """Reciprocal-sum optimum minus the trial sum (Hersch's principle)."""
        return 1.0 / self.lambda1 + 1.0 / self.mu1 + 1.0 / self.mu2 - self.trial_sum

    def margin_lower(self) -> float:
        """Trial sum minus A / (d * 4 pi / 3) (the proof's energy/mass chain)."""
        return self.trial_sum - self.area / (self.degree * FOUR_PI_3)

    def budgeted_slack2(self) -> float:
        return self.slack2 + (self.eps_fem or {}).get("slack2", 0.0)

    def budgeted_slack3(self) -> float:
        return self.slack3 + (self.eps_fem or {}).get("slack3", 0.0)

    def to_json_dict(self) -> dict:
        doc = {
            "lambda1": self.lambda1, "mu1": self.mu1, "mu2": self.mu2,
            "area": self.area, "degree": self.degree,
            "lhs2": self.lhs2, "rhs2": self.rhs2, "slack2": self.slack2,
            "lhs3": self.lhs3, "rhs3": self.rhs3, "slack3": self.slack3,
            "trial_sum": self.trial_sum,
            "mesh_resolution": self.mesh_resolution,
            "dirichlet_residuals": list(self.dirichlet_residuals),
            "neumann_residuals": list(self.neumann_residuals),
        }
        if self.balance is not None:
            doc["balance"] = self.balance.to_json_dict()
        if self.eps_fem is not None:
            doc["eps_fem"] = dict(self.eps_fem)
            doc["budgeted_slack2"] = self.budgeted_slack2()
            doc["budgeted_slack3"] = self.budgeted_slack3()
        if self.failure is not None:
            doc["failure"] = self.failure
        return doc

    def csv_row(self, fixture: str = "", level: int = 0) -> dict:
        eps = self.eps_fem or {}
        return {
            "fixture": fixture, "level": level,
            "mesh_resolution": self.mesh_resolution,
            "area": self.area, "degree": self.degree,
            "lambda1": self.lambda1, "mu1": self.mu1, "mu2": self.mu2,
            "lhs2": self.lhs2, "rhs2": self.rhs2, "slack2": self.slack2,
            "lhs3": self.lhs3, "rhs3": self.rhs3, "slack3": self.slack3,
            "trial_sum": self.trial_sum,
            "balance_residual": self.balance.residual if self.balance else "",
            "balance_iterations": self.balance.iterations if self.balance else "",
            "eps_slack2": eps.get("slack2", ""),
            "eps_slack3": eps.get("slack3", ""),
            "eps_upper": eps.get("upper", ""),
            "eps_lower": eps.get("lower", ""),
        }


def trial_bound_sum(mesh: SurfaceMesh, f: MapSample, a: complex,
                    balance_tol_rel: float = 1e-8,
                    K=None, M=None) -> float:
    """Sum of reciprocal Rayleigh quotients of the balanced transplants.

    The parameter a must already balance the center of gravity (checked,
    since unbalanced equatorial coordinates are inadmissible Neumann
    trials).  The two Neumann trials are projected to exact zero M-mean
    and rotated into an M-orthogonal pair, so the discrete reciprocal-sum
    bound applies verbatim.
    """
    if K is None:
        K = fem.assemble_stiffness(mesh)
    if M is None:
        M = fem.assemble_mass(mesh)
    ones = np.ones(mesh.vertex_count)
    m1 = M @ ones
    area = float(m1.sum())

    g1, g2 = center_of_gravity(mesh, f, a)
    residual = float(np.hypot(g1, g2))
    if residual > balance_tol_rel * area:
        raise ValueError(
            f"parameter a={a} is not balanced: center-of-gravity residual "
            f"{residual:.3e} exceeds {balance_tol_rel:.0e} * area")

    sf = transplant_coords(mesh, f, a)
    v1 = sf.x1 - (m1 @ sf.x1) / area
    v2 = sf.x2 - (m1 @ sf.x2) / area
    # rotate the equatorial pair to kill the M-cross term
    g12 = float(v1 @ (M @ v2))
    g11 = float(v1 @ (M @ v1))
    g22 = float(v2 @ (M @ v2))
    theta = 0.5 * np.arctan2(2.0 * g12, g11 - g22)
    c, s = np.cos(theta), np.sin(theta)
    w1 = c * v1 + s * v2
    w2 = -s * v1 + c * v2

    total = 0.0
    for u in (sf.x3, w1, w2):
        total += 1.0 / fem.rayleigh_quotient(mesh, u, K=K, M=M)
    return total


def verify_eq3(report: VerificationReport) -> tuple[float, float, float]:
    """Sides and slack of the product-form inequality, pure arithmetic."""
    lhs3 = report.lambda1 * report.mu1 * report.area
    rhs3 = report.degree * FOUR_PI_3 * (2.0 * report.lambda1 + report.mu1)
    return lhs3, rhs3, rhs3 - lhs3


def check_eq3_implication(report: VerificationReport,
                          rel_tol: float = 1e-12) -> None:
    """Assert algebraically that the product inequality follows from the
    reciprocal one when mu1 <= mu2:

        slack3 >= lambda1 * mu1 * d * (4 pi / 3) * A * slack2.

    Raises AssertionError if the identity chain fails (beyond rounding).
    """
    if report.mu1 > report.mu2:
        raise AssertionError("mu1 > mu2: eigenvalues out of order")
    bound = (report.lambda1 * report.mu1 * report.degree * FOUR_PI_3
             * report.area * report.slack2)
    scale = abs(report.rhs3) + abs(report.lhs3)
    if report.slack3 < bound - rel_tol * scale:
        raise AssertionError(
            f"slack3={report.slack3:.6g} below the implied bound {bound:.6g}")


def verify_inequality(mesh: SurfaceMesh, f: MapSample,
                      degree: int | str = "auto",
                      method: str = "auto") -> VerificationReport:
    """Run the full pipeline and fill a VerificationReport.

    degree="auto" estimates the covering degree from the map's Jacobian
    integral; pass an integer to override for coarsely sampled maps.
    """
    area = mesh.total_area()
    if degree == "auto":
        d = compute_degree(mesh, f.values)
    else:
        d = int(degree)
        if d < 1:
            raise ValueError("degree must be a positive integer")

    dirichlet = fem.solve_dirichlet(mesh, 1, method=method)
    neumann = fem.solve_neumann(mesh, 2, method=method)
    lam1 = float(dirichlet.eigenvalues[0])
    mu1, mu2 = float(neumann.eigenvalues[0]), float(neumann.eigenvalues[1])

    bal = balance_center_of_mass(mesh, f)
    trial = trial_bound_sum(mesh, f, bal.a)

    lhs2 = (1.0 / lam1 + 1.0 / mu1 + 1.0 / mu2) / area
    rhs2 = 3.0 / (4.0 * np.pi * d)
    report = VerificationReport(
        lambda1=lam1, mu1=mu1, mu2=mu2, area=area, degree=d,
        lhs2=lhs2, rhs2=rhs2, slack2=lhs2 - rhs2,
        lhs3=0.0, rhs3=0.0, slack3=0.0,
        trial_sum=trial, mesh_resolution=mesh.descriptor(),
        balance=bal,
        dirichlet_residuals=[float(r) for r in dirichlet.residuals],
        neumann_residuals=[float(r) for r in neumann.residuals],
    )
    report.lhs3, report.rhs3, report.slack3 = verify_eq3(report)
    check_eq3_implication(report)
    return report


def verify_with_budget(make_instance, resolution: int,
                       coarse_resolution: int | None = None,
                       degree: int | str = "auto",
                       method: str = "auto",
                       safety: float = 2.0) -> VerificationReport:
    """Verify at two resolutions and attach a Richardson error budget.

    `make_instance(resolution)` must return a (mesh, map) pair.  The
    budget for each inequality margin is `safety` times the change of
    that margin between the coarse and fine runs; the fine report is
    returned with eps_fem filled in.
    """
    if coarse_resolution is None:
        coarse_resolution = max(1, resolution // 2)
    fine = verify_inequality(*make_instance(resolution), degree=degree,
                             method=method)
    coarse = verify_inequality(*make_instance(coarse_resolution), degree=degree,
                               method=method)
    fine.eps_fem = {
        "slack2": safety * abs(fine.slack2 - coarse.slack2),
        "slack3": safety * abs(fine.slack3 - coarse.slack3),
        "upper": safety * abs(fine.margin_upper() - coarse.margin_upper()),
        "lower": safety * abs(fine.margin_lower() - coarse.margin_lower()),
        "coarse_resolution": coarse.mesh_resolution,
    }
    return fine


def reports_to_csv(rows: list[dict]) -> str:
    """Render csv_row() dictionaries as CSV text with a fixed header."""
    buf = io.StringIO()
    writer = csv.DictWriter(buf, fieldnames=CSV_FIELDS, lineterminator="\n")
    writer.writeheader()
    for row in rows:
        writer.writerow(row)
    return buf.getvalue()
