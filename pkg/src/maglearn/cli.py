"""Command-line workflows: dataset generation, learning, evaluation,
benchmark sweeps over a (family, d, n, seed) grid, forbidden-matrix
construction from variable groups, and the confounding demo.

Exit codes: 0 success (including a timeout that still produced an
incumbent), 2 invalid configuration, 3 I/O failure.
"""
from __future__ import annotations

import argparse
import json
import os
import statistics
import sys
import time
from pathlib import Path

import numpy as np

from . import datagen, evaluation, solver
from .datagen import Dataset
from .graph import MixedGraph

METRICS_HEADER = "dataset,d,n,seed,method,shd,f1_typed,f1_skeleton,delta,runtime_s,gap"


def _fmt(v: float) -> str:
    return f"{float(v):.9g}"


def _write_json(doc: dict, path: Path) -> None:
    path.write_text(json.dumps(doc, sort_keys=True, indent=2) + "\n")


def forbidden_to_json_dict(forbidden: np.ndarray, names) -> dict:
    pairs = []
    d = forbidden.shape[0]
    for j in range(d):
        for k in range(j + 1, d):
            if forbidden[j, k]:
                pairs.append([j, k])
    return {"d": d, "names": list(names), "pairs": pairs}


def forbidden_from_json_dict(doc: dict) -> np.ndarray:
    d = int(doc["d"])
    forbidden = np.zeros((d, d), dtype=np.int8)
    for j, k in doc.get("pairs", []):
        forbidden[j, k] = 1
        forbidden[k, j] = 1
    return forbidden


def _heat_color(value: float, vmax: float) -> str:
    t = 0.0 if vmax == 0 else max(-1.0, min(1.0, value / vmax))
    if t >= 0:
        level = int(round(255 * (1 - t)))
        return f"rgb(255,{level},{level})"
    level = int(round(255 * (1 + t)))
    return f"rgb({level},{level},255)"


def write_heatmap_svg(matrix: np.ndarray, names, path: Path, title: str = "") -> None:
    """Signed heatmap on a diverging scale centered at zero, range set by
    the largest weight magnitude."""
    matrix = np.asarray(matrix, dtype=float)
    d = matrix.shape[0]
    cell, margin, top = 28, 90, 40
    width = margin + d * cell + 10
    height = top + d * cell + 10
    vmax = float(np.max(np.abs(matrix))) if matrix.size else 0.0
    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}">',
        f'<text x="{margin}" y="20" font-size="14">{title} (max |w| = {_fmt(vmax)})</text>',
    ]
    for j in range(d):
        y = top + j * cell
        parts.append(
            f'<text x="{margin - 6}" y="{y + cell * 0.7:.0f}" font-size="10" text-anchor="end">{names[j]}</text>'
        )
        parts.append(
            f'<text x="{margin + j * cell + cell / 2:.0f}" y="{top - 4}" font-size="10" text-anchor="middle">{names[j]}</text>'
        )
        for k in range(d):
            x = margin + k * cell
            color = _heat_color(matrix[j, k], vmax)
            parts.append(
                f'<rect x="{x}" y="{y}" width="{cell}" height="{cell}" fill="{color}" stroke="#999"/>'
            )
    parts.append("</svg>")
    path.write_text("\n".join(parts) + "\n")


def _generate_synthetic(family: str, args):
    if family == "er":
        truth = datagen.gen_er(args.d, args.ratio, args.seed)
    elif family == "bf":
        truth = datagen.gen_bf(args.d, args.p_directed, args.p_bidirected, args.seed)
    else:
        truth = datagen.gen_3bf(args.d, args.p_directed, args.p_bidirected, args.seed)
    data = datagen.sem_sample(truth, args.n, args.seed + 1)
    gt, reduced = datagen.hide_latents(truth, data, args.latent_fraction, args.seed + 2)
    forbidden = datagen.gen_forbidden(gt.observed, args.forbidden_fraction, args.seed + 3)
    gt = datagen.GroundTruth(
        gt.full, gt.full_names, gt.latents, gt.observed, gt.observed_names, forbidden
    )
    return gt, reduced, forbidden


def cmd_generate(args) -> int:
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    if args.family == "berkeley":
        demo = datagen.berkeley_demo(args.n, args.seed)
        dataset, forbidden = demo.dataset, demo.forbidden
        truth_doc = demo.expected.to_json_dict(list(dataset.names))
        truth_doc["latents"] = [demo.truth_names[i] for i in demo.latents]
        truth_doc["F"] = forbidden_to_json_dict(forbidden, dataset.names)["pairs"]
    else:
        gt, dataset, forbidden = _generate_synthetic(args.family, args)
        truth_doc = gt.to_json_dict()
    datagen.write_csv(dataset, out / "dataset.csv")
    _write_json(truth_doc, out / "truth.json")
    _write_json(forbidden_to_json_dict(forbidden, dataset.names), out / "forbidden.json")
    print(f"wrote dataset.csv, truth.json, forbidden.json to {out}")
    return 0


def cmd_learn(args) -> int:
    dataset = datagen.read_csv(args.data)
    if args.forbidden:
        doc = json.loads(Path(args.forbidden).read_text())
        forbidden = forbidden_from_json_dict(doc)
        if forbidden.shape[0] != dataset.d:
            raise ValueError("forbidden matrix does not match the dataset dimension")
    else:
        forbidden = np.zeros((dataset.d, dataset.d), dtype=np.int8)
    instance = solver.Instance(
        x=dataset.x,
        forbidden=forbidden,
        lam=args.lam,
        q=args.q,
        weight_bound=args.big_m,
        time_limit=args.time_limit,
        gap_tol=args.gap_tol,
        seed=args.seed,
    )
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    solution = solver.solve(instance, log=out / "solver.log")
    _write_json(solution.to_json_dict(list(dataset.names)), out / "solution.json")
    if args.heatmaps:
        directed_w = solution.weights * (solution.graph.directed > 0)
        bidirected_w = solution.weights * (solution.graph.bidirected > 0)
        write_heatmap_svg(directed_w, dataset.names, out / "heatmap_directed.svg", "directed weights")
        write_heatmap_svg(bidirected_w, dataset.names, out / "heatmap_bidirected.svg", "bidirected weights")
    if solution.status == "TIME_LIMIT":
        print("warning: time limit reached, reporting best incumbent", file=sys.stderr)
    print(f"status={solution.status} objective={_fmt(solution.objective)} gap={_fmt(solution.mip_gap)}")
    return 0


def _metrics_row(dataset_name, d, n, seed, method, shd_val, f1_typed, f1_skel, delta, runtime_s, gap) -> str:
    return ",".join(
        [
            dataset_name,
            str(d),
            str(n),
            str(seed),
            method,
            _fmt(shd_val),
            _fmt(f1_typed),
            _fmt(f1_skel),
            _fmt(delta),
            _fmt(runtime_s),
            _fmt(gap),
        ]
    )


def _append_metrics(path: Path, row: str) -> None:
    fresh = not path.exists()
    with open(path, "a") as fh:
        if fresh:
            fh.write(METRICS_HEADER + "\n")
        fh.write(row + "\n")


def _evaluate(solution_doc: dict, truth_doc: dict, delta_grid):
    learned, _ = MixedGraph.from_json_dict(solution_doc)
    truth, _ = MixedGraph.from_json_dict(truth_doc)
    if learned.d != truth.d:
        raise ValueError("solution and ground truth have different dimensions")
    weights = np.asarray(solution_doc["W"], dtype=float)
    best_graph, best_shd, delta = evaluation.best_over_thresholds(
        weights, learned, truth, delta_grid
    )
    return {
        "shd": best_shd,
        "f1_typed": evaluation.f1(truth, best_graph, "typed"),
        "f1_skeleton": evaluation.f1(truth, best_graph, "skeleton"),
        "delta": delta,
        "gap": float(solution_doc.get("gap", 0.0)),
    }


def _parse_delta_grid(text):
    if not text:
        return None
    return [float(v) for v in text.split(",")]


def cmd_eval(args) -> int:
    solution_doc = json.loads(Path(args.solution).read_text())
    truth_doc = json.loads(Path(args.truth).read_text())
    metrics = _evaluate(solution_doc, truth_doc, _parse_delta_grid(args.delta_grid))
    row = _metrics_row(
        args.dataset_name,
        int(truth_doc["d"]),
        args.n,
        args.seed,
        args.method,
        metrics["shd"],
        metrics["f1_typed"],
        metrics["f1_skeleton"],
        metrics["delta"],
        args.runtime,
        metrics["gap"],
    )
    _append_metrics(Path(args.out), row)
    print(row)
    return 0


def _bench_task(task: dict):
    """One generate -> learn -> eval cycle; returns a metrics row string."""
    family = task["family"]
    seed = task["seed"]
    if family == "er":
        truth = datagen.gen_er(task["d"], task["ratio"], seed)
    elif family == "bf":
        truth = datagen.gen_bf(task["d"], task["p_directed"], task["p_bidirected"], seed)
    elif family == "3bf":
        truth = datagen.gen_3bf(task["d"], task["p_directed"], task["p_bidirected"], seed)
    else:
        raise ValueError(f"unknown family {family!r}")
    data = datagen.sem_sample(truth, task["n"], seed + 1)
    gt, reduced = datagen.hide_latents(truth, data, task["latent_fraction"], seed + 2)
    forbidden = datagen.gen_forbidden(gt.observed, task["forbidden_fraction"], seed + 3)
    instance = solver.Instance(
        x=reduced.x,
        forbidden=forbidden,
        lam=task["lam"],
        q=task["q"],
        weight_bound=task["big_m"],
        time_limit=task["time_limit"],
        gap_tol=task["gap_tol"],
        seed=seed,
    )
    t0 = time.monotonic()
    solution = solver.solve(instance)
    runtime = time.monotonic() - t0
    best_graph, best_shd, delta = evaluation.best_over_thresholds(
        solution.weights, solution.graph, gt.observed
    )
    return _metrics_row(
        family,
        task["d"],
        task["n"],
        seed,
        "maglearn",
        best_shd,
        evaluation.f1(gt.observed, best_graph, "typed"),
        evaluation.f1(gt.observed, best_graph, "skeleton"),
        delta,
        runtime,
        solution.mip_gap,
    )


def _summarize(rows: list[str]) -> list[str]:
    cells: dict[tuple, list[dict]] = {}
    for row in rows:
        parts = row.split(",")
        key = (parts[0], parts[1], parts[2])
        cells.setdefault(key, []).append(
            {
                "shd": float(parts[5]),
                "f1_typed": float(parts[6]),
                "f1_skeleton": float(parts[7]),
                "runtime_s": float(parts[9]),
            }
        )
    out = ["dataset,d,n,count,shd_mean,shd_std,f1_typed_mean,f1_typed_std,f1_skeleton_mean,f1_skeleton_std,runtime_mean,runtime_std"]
    for key in sorted(cells):
        vals = cells[key]
        fields = [key[0], key[1], key[2], str(len(vals))]
        for metric in ("shd", "f1_typed", "f1_skeleton", "runtime_s"):
            series = [v[metric] for v in vals]
            mean = statistics.fmean(series)
            std = statistics.pstdev(series) if len(series) > 1 else 0.0
            fields.extend([_fmt(mean), _fmt(std)])
        out.append(",".join(fields))
    return out


def cmd_bench(args) -> int:
    families = args.families.split(",")
    d_list = [int(v) for v in args.d_list.split(",")]
    n_list = [int(v) for v in args.n_list.split(",")]
    seeds = list(range(args.seeds))
    tasks = []
    for family in families:
        if family not in ("er", "bf", "3bf"):
            raise ValueError(f"unknown family {family!r}")
        for d in d_list:
            for n in n_list:
                for seed in seeds:
                    tasks.append(
                        {
                            "family": family,
                            "d": d,
                            "n": n,
                            "seed": seed,
                            "ratio": args.ratio,
                            "p_directed": args.p_directed,
                            "p_bidirected": args.p_bidirected,
                            "latent_fraction": args.latent_fraction,
                            "forbidden_fraction": args.forbidden_fraction,
                            "lam": args.lam,
                            "q": args.q,
                            "big_m": args.big_m,
                            "time_limit": args.time_limit,
                            "gap_tol": args.gap_tol,
                        }
                    )
    workers = int(os.environ.get("MAGLEARN_WORKERS", "1"))
    rows: list[str] = []
    failures: list[str] = []
    if workers > 1:
        import multiprocessing

        with multiprocessing.Pool(workers) as pool:
            results = pool.map(_bench_task_safe, tasks)
    else:
        results = [_bench_task_safe(task) for task in tasks]
    for ok, payload in results:
        (rows if ok else failures).append(payload)
    rows.sort()
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    (out / "runs.csv").write_text("\n".join([METRICS_HEADER] + rows) + "\n")
    (out / "summary.csv").write_text("\n".join(_summarize(rows)) + "\n")
    if failures:
        (out / "failures.log").write_text("\n".join(failures) + "\n")
    print(f"{len(rows)} runs ok, {len(failures)} failed; results in {out}")
    return 0


def _bench_task_safe(task: dict):
    try:
        return True, _bench_task(task)
    except Exception as exc:  # noqa: BLE001 - sweep must survive bad cells
        return False, f"{task['family']},d={task['d']},n={task['n']},seed={task['seed']}: {exc}"


def cmd_forbidden_from_groups(args) -> int:
    dataset = datagen.read_csv(args.data)
    groups: list[list[str]] = []
    seen: set[str] = set()
    for spec in args.group:
        cols = [c.strip() for c in spec.split(",") if c.strip()]
        for col in cols:
            if col not in dataset.names:
                raise ValueError(f"unknown column name {col!r}")
            if col in seen:
                raise ValueError(f"column {col!r} appears in more than one group")
            seen.add(col)
        groups.append(cols)
    index = {name: i for i, name in enumerate(dataset.names)}
    group_of = {}
    for gi, cols in enumerate(groups):
        for col in cols:
            group_of[index[col]] = gi
    d = dataset.d
    forbidden = np.zeros((d, d), dtype=np.int8)
    for j in range(d):
        for k in range(j + 1, d):
            gj, gk = group_of.get(j), group_of.get(k)
            if gj is not None and gk is not None and gj != gk:
                forbidden[j, k] = forbidden[k, j] = 1
    _write_json(forbidden_to_json_dict(forbidden, dataset.names), Path(args.out))
    print(f"marked {int(forbidden.sum()) // 2} cross-group pairs")
    return 0


def cmd_demo(args) -> int:
    demo = datagen.berkeley_demo(args.n, args.seed)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    datagen.write_csv(demo.dataset, out / "dataset.csv")
    _write_json(forbidden_to_json_dict(demo.forbidden, demo.dataset.names), out / "forbidden.json")
    instance = solver.Instance(
        x=demo.dataset.x,
        forbidden=demo.forbidden,
        lam=args.lam,
        q=args.q,
        weight_bound=args.big_m,
        time_limit=args.time_limit,
        gap_tol=args.gap_tol,
        seed=args.seed,
    )
    solution = solver.solve(instance)
    _write_json(solution.to_json_dict(list(demo.dataset.names)), out / "solution.json")
    names = demo.dataset.names
    g_idx, a_idx = names.index("gender"), names.index("admit")
    found_bi = bool(solution.graph.bidirected[g_idx, a_idx])
    found_dir = bool(solution.graph.directed[g_idx, a_idx])
    for j, k in solution.graph.directed_edges():
        print(f"  {names[j]} -> {names[k]}")
    for j, k in solution.graph.bidirected_pairs():
        print(f"  {names[j]} <-> {names[k]}")
    verdict = "confounding identified" if found_bi and not found_dir else "confounding NOT identified"
    print(f"gender <-> admit: {found_bi}; gender -> admit: {found_dir} ({verdict})")
    return 0


def _add_solver_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--lambda", dest="lam", type=float, default=1.0, help="edge penalty weight")
    p.add_argument("--q", type=int, default=2, choices=(1, 2), help="residual exponent")
    p.add_argument("--big-m", type=float, default=100.0, help="weight magnitude bound")
    p.add_argument("--time-limit", type=float, default=900.0, help="seconds")
    p.add_argument("--gap-tol", type=float, default=0.0, help="stop when the gap reaches this")
    p.add_argument("--seed", type=int, default=0)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="maglearn", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("generate", help="write a synthetic dataset, ground truth, and forbidden matrix")
    p.add_argument("--family", required=True, choices=("er", "bf", "3bf", "berkeley"))
    p.add_argument("--d", type=int, default=5, help="vertex count of the full graph")
    p.add_argument("--ratio", type=int, default=2, help="edges per vertex (er family)")
    p.add_argument("--p-directed", type=float, default=0.2)
    p.add_argument("--p-bidirected", type=float, default=0.2)
    p.add_argument("--n", type=int, default=1000)
    p.add_argument("--latent-fraction", type=float, default=0.2)
    p.add_argument("--forbidden-fraction", type=float, default=0.2)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_generate)

    p = sub.add_parser("learn", help="fit a maximal ancestral graph to a dataset")
    p.add_argument("--data", required=True)
    p.add_argument("--forbidden", default=None)
    p.add_argument("--heatmaps", action="store_true", help="also write weight heatmap SVGs")
    p.add_argument("--out", required=True)
    _add_solver_flags(p)
    p.set_defaults(func=cmd_learn)

    p = sub.add_parser("eval", help="score a solution against a ground truth")
    p.add_argument("--solution", required=True)
    p.add_argument("--truth", required=True)
    p.add_argument("--delta-grid", default=None, help="comma-separated thresholds")
    p.add_argument("--dataset-name", default="dataset")
    p.add_argument("--method", default="maglearn")
    p.add_argument("--n", type=int, default=0)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--runtime", type=float, default=0.0)
    p.add_argument("--out", required=True, help="metrics CSV to append to")
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("bench", help="full generate/learn/eval sweep with aggregates")
    p.add_argument("--families", default="er,bf")
    p.add_argument("--d-list", default="4,5")
    p.add_argument("--n-list", default="20,100")
    p.add_argument("--seeds", type=int, default=10, help="number of seeds (0..k-1)")
    p.add_argument("--ratio", type=int, default=1)
    p.add_argument("--p-directed", type=float, default=0.2)
    p.add_argument("--p-bidirected", type=float, default=0.2)
    p.add_argument("--latent-fraction", type=float, default=0.2)
    p.add_argument("--forbidden-fraction", type=float, default=0.2)
    p.add_argument("--out", required=True)
    _add_solver_flags(p)
    p.set_defaults(func=cmd_bench)

    p = sub.add_parser("forbidden-from-groups", help="cross-group forbidden matrix from named columns")
    p.add_argument("--data", required=True)
    p.add_argument("--group", action="append", required=True, help="comma-separated column names; repeatable")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_forbidden_from_groups)

    p = sub.add_parser("demo", help="run the admissions confounding demo end to end")
    p.add_argument("--n", type=int, default=1000)
    p.add_argument("--out", required=True)
    _add_solver_flags(p)
    p.set_defaults(func=cmd_demo)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ValueError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
