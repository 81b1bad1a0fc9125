"""Command-line front end: fixture generation, spectra, verification, batch."""

from __future__ import annotations

import json
import os
import sys
from concurrent.futures import ThreadPoolExecutor

import click
import numpy as np

from . import fem, mesh as meshmod, verify as verifymod
from .transplant import disc_map_from_positions, identity_map_from_positions


def _fail(message: str, code: int = 1):
    click.echo(json.dumps({"error": message}, sort_keys=True), err=True)
    sys.exit(code)


def _dump(path, doc):
    text = json.dumps(doc, sort_keys=True, indent=2) + "\n"
    if path is None or path == "-":
        click.echo(text, nl=False)
    else:
        with open(path, "w") as fh:
            fh.write(text)


def random_log_factor(seed: int, amplitude: float = 1.0):
    """Smooth random conformal log-factor, bounded by `amplitude`.

    A low-order harmonic polynomial in z with seeded coefficients,
    rescaled so that max |phi| over the disc equals `amplitude`.
    """
    rng = np.random.default_rng(seed)
    coeff = rng.standard_normal(6)

    def phi(z):
        z = np.asarray(z, dtype=complex)
        raw = (coeff[0] * z.real + coeff[1] * z.imag
               + coeff[2] * (z ** 2).real + coeff[3] * (z ** 2).imag
               + coeff[4] * (z ** 3).real + coeff[5] * (z ** 3).imag)
        # bound on the closed disc: |Re z^k|, |Im z^k| <= 1
        bound = np.sum(np.abs(coeff))
        return amplitude * raw / bound

    return phi


def gaussian_bump_log_factor(center: complex = 0.5, amplitude: float = 1.0,
                             width: float = 0.3):
    def phi(z):
        z = np.asarray(z, dtype=complex)
        return amplitude * np.exp(-(np.abs(z - center) ** 2) / (2.0 * width ** 2))

    return phi


def _generate(shape, resolution, colatitude, inner_radius, seed, amplitude):
    if shape == "disc":
        m = meshmod.generate_disc(resolution)
        return m, identity_map_from_positions(m)
    if shape == "cap":
        m = meshmod.generate_spherical_cap(colatitude, resolution)
        return m, disc_map_from_positions(m)
    if shape == "annulus":
        return meshmod.generate_annulus(inner_radius, resolution), None
    if shape == "branched-disc":
        return meshmod.generate_branched_double_disc(resolution)
    if shape == "conformal-disc":
        return meshmod.generate_conformal_disc(
            resolution, random_log_factor(seed, amplitude))
    raise ValueError(f"unknown shape {shape!r}")


@click.group()
def main():
    """Spectra and eigenvalue-inequality verification for bordered surfaces."""


@main.command()
@click.option("--shape", required=True,
              type=click.Choice(["disc", "cap", "annulus", "branched-disc",
                                 "conformal-disc"]))
@click.option("--resolution", type=int, required=True)
@click.option("--colatitude", type=float, default=np.pi / 2,
              help="cap polar angle in radians")
@click.option("--inner-radius", type=float, default=0.5)
@click.option("--seed", type=int, default=0, help="conformal-disc RNG seed")
@click.option("--amplitude", type=float, default=1.0,
              help="bound on the conformal log-factor")
@click.option("--out", type=click.Path(), required=True)
def gen(shape, resolution, colatitude, inner_radius, seed, amplitude, out):
    """Generate a fixture mesh (with its map, when the shape defines one)."""
    try:
        m, f = _generate(shape, resolution, colatitude, inner_radius, seed,
                         amplitude)
        _dump(out, meshmod.mesh_to_json_dict(m, f))
    except (ValueError, RuntimeError) as exc:
        _fail(str(exc))


@main.command()
@click.argument("mesh_file", type=click.Path(exists=True))
@click.option("--bc", type=click.Choice(["dirichlet", "neumann"]),
              default="dirichlet")
@click.option("--k", type=int, default=4)
@click.option("--eigenfunctions", is_flag=True)
@click.option("--out", type=click.Path(), default="-")
def spectrum(mesh_file, bc, k, eigenfunctions, out):
    """Compute the k smallest eigenpairs of a mesh file."""
    try:
        m, _ = meshmod.load_mesh(mesh_file)
        solve = fem.solve_dirichlet if bc == "dirichlet" else fem.solve_neumann
        result = solve(m, k)
        _dump(out, result.to_json_dict(include_eigenfunctions=eigenfunctions))
    except (ValueError, RuntimeError) as exc:
        _fail(str(exc))


def _resolve_map(m, stored, map_kind):
    if map_kind == "file":
        if stored is None:
            raise ValueError("mesh file carries no map samples")
        return stored
    if map_kind == "id":
        if m.positions is None:
            raise ValueError("identity map needs embedded vertices")
        return identity_map_from_positions(m)
    if map_kind == "stereo":
        return disc_map_from_positions(m)
    raise ValueError(f"unknown map kind {map_kind!r}")


@main.command(name="verify")
@click.argument("mesh_file", type=click.Path(exists=True))
@click.option("--map", "map_kind", default="file",
              type=click.Choice(["file", "id", "stereo"]),
              help="map source: samples stored in the file, the identity "
                   "on embedded vertices, or stereographic projection")
@click.option("--degree", default="auto",
              help="'auto' (Jacobian integral) or an explicit integer")
@click.option("--out", type=click.Path(), default="-")
@click.option("--csv", "csv_path", type=click.Path(), default=None,
              help="append a CSV row to this file")
def verify_cmd(mesh_file, map_kind, degree, out, csv_path):
    """Verify both eigenvalue inequalities on a mesh-plus-map instance."""
    try:
        m, stored = meshmod.load_mesh(mesh_file)
        f = _resolve_map(m, stored, map_kind)
        deg = "auto" if degree == "auto" else int(degree)
        report = verifymod.verify_inequality(m, f, degree=deg)
        _dump(out, report.to_json_dict())
        if csv_path:
            row = report.csv_row(fixture=os.path.basename(mesh_file))
            _append_csv(csv_path, [row])
    except (ValueError, RuntimeError) as exc:
        _fail(str(exc))


def _append_csv(path, rows):
    text = verifymod.reports_to_csv(rows)
    if os.path.exists(path):
        text = text.split("\n", 1)[1]  # drop the header on append
    with open(path, "a") as fh:
        fh.write(text)


BATCH_FIXTURES = ["disc", "hemisphere", "cap-pi6", "cap-pi3",
                  "conformal-0", "conformal-1", "branched"]


def _batch_instance(name, resolution):
    if name == "disc":
        m = meshmod.generate_disc(resolution)
        return m, identity_map_from_positions(m)
    if name == "hemisphere":
        m = meshmod.generate_spherical_cap(np.pi / 2, resolution)
        return m, disc_map_from_positions(m)
    if name == "cap-pi6":
        m = meshmod.generate_spherical_cap(np.pi / 6, resolution)
        return m, disc_map_from_positions(m)
    if name == "cap-pi3":
        m = meshmod.generate_spherical_cap(np.pi / 3, resolution)
        return m, disc_map_from_positions(m)
    if name.startswith("conformal-"):
        seed = int(name.split("-")[1])
        return meshmod.generate_conformal_disc(resolution,
                                               random_log_factor(seed))
    if name == "branched":
        return meshmod.generate_branched_double_disc(resolution)
    raise ValueError(f"unknown fixture {name!r}")


@main.command()
@click.option("--refine-levels", type=int, default=2)
@click.option("--base-resolution", type=int, default=8)
@click.option("--csv", "csv_path", type=click.Path(), required=True)
@click.option("--out", type=click.Path(), default=None,
              help="also write the full reports as JSON")
def batch(refine_levels, base_resolution, csv_path, out):
    """Run the built-in fixture suite across refinement levels."""
    if refine_levels < 1:
        _fail("refine-levels must be >= 1", code=2)
    jobs = [(name, level, base_resolution * 2 ** level)
            for name in BATCH_FIXTURES for level in range(refine_levels)]

    def run(job):
        name, level, res = job
        m, f = _batch_instance(name, res)
        return job, verifymod.verify_inequality(m, f)

    workers = int(os.environ.get("MEMBRANE_SPECTRA_THREADS", "1"))
    try:
        if workers > 1:
            with ThreadPoolExecutor(max_workers=workers) as pool:
                results = list(pool.map(run, jobs))
        else:
            results = [run(job) for job in jobs]
    except (ValueError, RuntimeError) as exc:
        _fail(str(exc))

    rows = []
    docs = {}
    by_fixture = {}
    for (name, level, res), report in results:
        by_fixture.setdefault(name, {})[level] = report
    for (name, level, res), report in results:
        prev = by_fixture[name].get(level - 1)
        if prev is not None:
            report.eps_fem = {
                "slack2": 2.0 * abs(report.slack2 - prev.slack2),
                "slack3": 2.0 * abs(report.slack3 - prev.slack3),
                "upper": 2.0 * abs(report.margin_upper() - prev.margin_upper()),
                "lower": 2.0 * abs(report.margin_lower() - prev.margin_lower()),
                "coarse_resolution": prev.mesh_resolution,
            }
        rows.append(report.csv_row(fixture=name, level=level))
        docs[f"{name}:{level}"] = report.to_json_dict()
    with open(csv_path, "w") as fh:
        fh.write(verifymod.reports_to_csv(rows))
    if out:
        _dump(out, docs)


if __name__ == "__main__":
    main()
