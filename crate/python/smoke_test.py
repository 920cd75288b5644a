"""Smoke test for the fiberloom_py extension: load, optimize, plan, export."""

import pathlib
import sys

import fiberloom_py as fl

ROOT = pathlib.Path(__file__).resolve().parent.parent


def main() -> int:
    project = fl.Project.load(str(ROOT / "fixtures" / "minimal.toml"))
    assert len(project.connections()) == 10
    assert "connections" in project.derive_report()

    project.n_layers = 3
    layers = project.optimize()
    assert [l.x for l in layers] == [[2, 1, 0], [1, 2, 0], [1, 1, 1]], layers
    assert layers[0].objective == 78.0

    plan = project.plan(layers[2])
    assert plan.is_clean(), (plan.curvature_violations, plan.overlap_violations)
    assert plan.svg().lstrip().startswith("<")
    assert plan.export().strip()

    try:
        fl.Project.from_toml("schema_version = 1\ncolour = 3\n")
    except ValueError as e:
        assert "colour" in str(e)
    else:
        raise AssertionError("unknown field accepted")

    print(f"ok: {project.name}, {len(layers)} layers, {plan.n_paths} paths in layer 3")
    return 0


if __name__ == "__main__":
    sys.exit(main())
