"""Command-line front end for the counting-confidence pipeline.

Subcommands: synth, score, label, analyze, fit, predict, ablate, report.
Exit codes are a stable scripting contract: 0 success, 1 validation
error (including bad flags), 2 I/O error, 3 numerical failure. Every
command is deterministic given its inputs, the config file, and --seed;
per-image work may run on a thread pool but results are always emitted
in manifest order.
"""

from __future__ import annotations

import argparse
import csv
import json
import os
import sys
from pathlib import Path

import numpy as np

from .config import PipelineConfig, load_config
from .data import (
    ConditionMetadata,
    DensityClass,
    FACTOR_NAMES,
    ImageRecord,
    Phase,
    StirSpeed,
    TIndex,
    attach_annotations,
    load_detections,
    load_ground_truth,
    load_manifest,
)
from .errors import NumericalError, ValidationError
from .evaluation import evaluate_corpus
from .niqe import NiqeModel, load_default_model
from .pipeline import ImageScores, score_corpus
from .regression import (
    ConfidenceModel,
    evaluate_model,
    export_scatter,
    fit_confidence_model,
    run_ablation,
)
from .stats import (
    MetricRanking,
    Polarity,
    ScoreRow,
    ScoreTable,
    evaluate_hypotheses,
    select_optimal,
)
from .synth import SceneSpec, confidence_plan, generate_corpus, pristine_plan, single_variable_plan

SCORE_COLUMNS = [
    "image_path",
    "score_mdcbb",
    "score_pn",
    "score_agm",
    "score_iq",
    "score_ic",
    "score_pdu",
    "edge_density",
    "n_clusters",
    "noise_count",
    "flags",
]

LABEL_COLUMNS = ["image_path", "tp", "fp", "fn", "jaccard"]

# Metric columns the analyzer can derive from a scores CSV, and their
# default polarity split: quality metrics should fall under degradation,
# complexity metrics should rise.
INTERNAL_METRICS = {"niqe": "score_iq", "entropy": "score_ic", "edge_density": "edge_density"}
DEFAULT_ICA = ("entropy", "edge_density")


def _fail(msg: str) -> None:
    raise ValidationError(msg)


def _read_csv(path: str | Path) -> tuple[list[str], list[dict[str, str]]]:
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None:
            _fail(f"{path} has no header row")
        rows = list(reader)
    for i, row in enumerate(rows, start=2):
        if None in row or any(v is None for v in row.values()):
            _fail(f"{path} line {i}: wrong field count")
    return list(reader.fieldnames), rows


def _float_cell(row: dict[str, str], col: str, path, line: int) -> float:
    try:
        return float(row[col])
    except KeyError:
        _fail(f"{path} is missing column {col!r}")
    except ValueError:
        _fail(f"{path} line {line}: column {col!r} is not a number: {row[col]!r}")


def _config_from_args(args) -> PipelineConfig:
    cfg = load_config(args.config) if getattr(args, "config", None) else PipelineConfig()
    if getattr(args, "seed", None) is not None:
        cfg = PipelineConfig(
            segmentation=cfg.segmentation,
            clustering=cfg.clustering,
            regression=cfg.regression,
            niqe_model_path=cfg.niqe_model_path,
            edge_threshold=cfg.edge_threshold,
            iou_thresh=cfg.iou_thresh,
            normalize_metrics=cfg.normalize_metrics,
            threads=cfg.threads,
            seed=args.seed,
        )
    return cfg


def _thread_count(args, cfg: PipelineConfig) -> int:
    if getattr(args, "threads", None) is not None:
        return args.threads
    env = os.environ.get("COUNTCONF_THREADS")
    if env:
        try:
            return int(env)
        except ValueError:
            _fail(f"COUNTCONF_THREADS must be an integer, got {env!r}")
    return cfg.threads


def _niqe_model(args, cfg: PipelineConfig) -> NiqeModel:
    path = getattr(args, "niqe_model", None) or cfg.niqe_model_path
    if path is None:
        return load_default_model()
    return NiqeModel.load(path)


def _write_scores_csv(scores: list[ImageScores], path) -> None:
    lines = [",".join(SCORE_COLUMNS)]
    for s in scores:
        f = s.factors
        lines.append(
            ",".join(
                [
                    s.image_id,
                    repr(f.mdcbb),
                    repr(f.pn),
                    repr(f.agm),
                    repr(f.iq),
                    repr(f.ic),
                    repr(f.pdu),
                    repr(s.edge_density),
                    str(s.n_clusters),
                    str(s.noise_count),
                    ";".join(s.flags),
                ]
            )
        )
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def cmd_synth(args) -> int:
    base_seed = args.seed if args.seed is not None else 7
    if args.plan_file:
        plan = _plan_from_file(args.plan_file)
    elif args.plan == "single-variable":
        plan = single_variable_plan(base_seed)
    elif args.plan == "confidence":
        plan = confidence_plan(n_groups=args.groups, base_seed=base_seed * 1000 + 40000)
    elif args.plan == "pristine":
        plan = pristine_plan(n_images=args.images, base_seed=base_seed * 1000 + 90000)
    else:
        _fail("either --plan or --plan-file is required")
    cfg = _config_from_args(args)
    result = generate_corpus(
        plan,
        args.out,
        seg_cfg=cfg.segmentation,
        stick_on_stirring=not args.no_stick,
        degrade=not args.no_degrade,
    )
    print(f"wrote {len(result.records)} images under {args.out}")
    return 0


_SCENE_KEYS = {
    "seed",
    "width",
    "height",
    "pest_count",
    "pest_radius_range",
    "cluster_tightness",
    "blur_sigma",
    "noise_sigma",
    "soil_speckle_density",
    "distractor_count",
    "condition",
}
_CONDITION_KEYS = {
    "group_id",
    "phase",
    "stir_speed",
    "soil",
    "density_class",
    "pest_count",
    "t_index",
    "frame_offset_s",
}


def _plan_from_file(path: str) -> list[SceneSpec]:
    try:
        payload = json.loads(Path(path).read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        _fail(f"plan file {path} is not valid JSON: {exc}")
    if not isinstance(payload, list) or not payload:
        _fail(f"plan file {path} must be a nonempty JSON list of scene objects")
    plan = []
    for i, entry in enumerate(payload):
        if not isinstance(entry, dict):
            _fail(f"plan entry {i} is not an object")
        unknown = sorted(set(entry) - _SCENE_KEYS)
        if unknown:
            _fail(f"plan entry {i} has unknown key {unknown[0]!r}")
        if "condition" not in entry or not isinstance(entry["condition"], dict):
            _fail(f"plan entry {i} needs a 'condition' object")
        cond_raw = entry["condition"]
        unknown = sorted(set(cond_raw) - _CONDITION_KEYS)
        if unknown:
            _fail(f"plan entry {i} condition has unknown key {unknown[0]!r}")
        try:
            condition = ConditionMetadata(
                group_id=str(cond_raw["group_id"]),
                phase=Phase(cond_raw["phase"]),
                stir_speed=StirSpeed(cond_raw["stir_speed"]),
                soil=bool(cond_raw["soil"]),
                density_class=DensityClass(cond_raw["density_class"]),
                pest_count=int(cond_raw["pest_count"]),
                t_index=TIndex(cond_raw["t_index"]),
                frame_offset_s=float(cond_raw.get("frame_offset_s", 0.0)),
            )
        except KeyError as exc:
            _fail(f"plan entry {i} condition is missing key {exc}")
        except ValueError as exc:
            _fail(f"plan entry {i} condition invalid: {exc}")
        kwargs = {k: v for k, v in entry.items() if k != "condition"}
        if "pest_radius_range" in kwargs:
            kwargs["pest_radius_range"] = tuple(kwargs["pest_radius_range"])
        try:
            plan.append(SceneSpec(condition=condition, **kwargs))
        except TypeError as exc:
            _fail(f"plan entry {i} invalid: {exc}")
    return plan


def cmd_score(args) -> int:
    cfg = _config_from_args(args)
    records = load_manifest(args.manifest)
    dets = load_detections(args.detections)
    records = attach_annotations(records, detections=dets)
    model = _niqe_model(args, cfg)
    scores = score_corpus(
        records,
        model,
        seg_cfg=cfg.segmentation,
        cluster_cfg=cfg.clustering,
        edge_threshold=cfg.edge_threshold,
        base_dir=Path(args.manifest).resolve().parent,
        threads=_thread_count(args, cfg),
    )
    # Report ids as written in the manifest, not resolved absolute paths.
    raw_ids = _manifest_raw_ids(args.manifest)
    scores = [
        ImageScores(
            image_id=raw_ids[i],
            factors=s.factors,
            edge_density=s.edge_density,
            n_clusters=s.n_clusters,
            noise_count=s.noise_count,
            flags=s.flags,
        )
        for i, s in enumerate(scores)
    ]
    _write_scores_csv(scores, args.out)
    print(f"scored {len(scores)} images -> {args.out}")
    return 0


def _manifest_raw_ids(path) -> list[str]:
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        return [row["image_path"] for row in reader]


def cmd_label(args) -> int:
    cfg = _config_from_args(args)
    records = load_manifest(args.manifest, check_paths=False)
    dets = load_detections(args.detections)
    gts = load_ground_truth(args.ground_truth)
    records = attach_annotations(records, detections=dets, ground_truth=gts)
    raw_ids = _manifest_raw_ids(args.manifest)
    for rid, rec in zip(raw_ids, records):
        if rec.ground_truth is None:
            _fail(f"no ground truth for image {rid!r}")
    preds = [list(r.detections) for r in records]
    truth = [list(r.ground_truth) for r in records]
    matches, report = evaluate_corpus(preds, truth, cfg.iou_thresh)
    lines = [",".join(LABEL_COLUMNS)]
    for rid, m in zip(raw_ids, matches):
        lines.append(f"{rid},{m.tp},{m.fp},{m.fn},{m.jaccard!r}")
    Path(args.out).write_text("\n".join(lines) + "\n", encoding="utf-8")
    summary_path = args.summary or str(args.out) + ".summary.json"
    report.to_json(summary_path)
    print(
        f"labeled {len(matches)} images -> {args.out}"
        f" (mcc {report.mcc:.4f}, ap50 {report.ap_50:.4f})"
    )
    return 0


def _metric_values(
    rows: list[dict[str, str]], column: str, path
) -> dict[str, float]:
    values = {}
    for i, row in enumerate(rows, start=2):
        values[row["image_path"]] = _float_cell(row, column, path, i)
    return values


def _build_score_table(args) -> tuple[ScoreTable, list[str], list[str]]:
    records = load_manifest(args.manifest, check_paths=False)
    raw_ids = _manifest_raw_ids(args.manifest)
    meta_by_id = {rid: rec.metadata for rid, rec in zip(raw_ids, records)}

    _, score_rows = _read_csv(args.scores)
    if not score_rows:
        _fail(f"{args.scores} has no data rows")
    metric_columns: dict[str, dict[str, float]] = {}
    for name, column in INTERNAL_METRICS.items():
        metric_columns[name] = _metric_values(score_rows, column, args.scores)

    external_names: list[str] = []
    if args.external:
        header, ext_rows = _read_csv(args.external)
        if "image_path" not in header:
            _fail(f"{args.external} needs an image_path column")
        for col in header:
            if col == "image_path":
                continue
            if col in metric_columns:
                _fail(f"external metric {col!r} collides with an existing metric")
            metric_columns[col] = _metric_values(ext_rows, col, args.external)
            external_names.append(col)

    ica = [m.strip() for m in args.ica_metrics.split(",") if m.strip()]
    if args.iqa_metrics is not None:
        iqa = [m.strip() for m in args.iqa_metrics.split(",") if m.strip()]
    else:
        iqa = [m for m in metric_columns if m not in ica]
    for name in iqa + ica:
        if name not in metric_columns:
            _fail(f"metric {name!r} is not present in the scores or external CSV")
    overlap = set(iqa) & set(ica)
    if overlap:
        _fail(f"metric {sorted(overlap)[0]!r} listed as both quality and complexity")

    table_rows = []
    for row in score_rows:
        rid = row["image_path"]
        if rid not in meta_by_id:
            _fail(f"scores row {rid!r} does not appear in the manifest")
        scores = {}
        for name in iqa + ica:
            col = metric_columns[name]
            if rid not in col:
                _fail(f"metric {name!r} has no value for image {rid!r}")
            scores[name] = col[rid]
        table_rows.append(ScoreRow(image_id=rid, metadata=meta_by_id[rid], scores=scores))
    table = ScoreTable(rows=tuple(table_rows), metrics=tuple(iqa + ica))
    return table, iqa, ica


_REPORT_ROWS = (
    ("temporal", ("Stir_Static",)),
    ("stir_speed", ("Med_Low", "High_Low", "High_Med")),
    ("soil", ("Soil_NoSoil",)),
    ("density", ("High_Low",)),
)


def _hypothesis_csv(results: dict[str, list], metrics: list[str]) -> str:
    lines = ["factor,statistic," + ",".join(metrics)]
    for factor, diff_labels in _REPORT_ROWS:
        by_metric = {m: next(r for r in results[m] if r.factor.value == factor) for m in metrics}
        for label in diff_labels:
            cells = []
            for m in metrics:
                diffs = dict(by_metric[m].mean_diffs)
                cells.append(repr(diffs[label]))
            lines.append(f"{factor},mean_diff_{label}," + ",".join(cells))
        lines.append(
            f"{factor},p_value," + ",".join(repr(by_metric[m].p_value) for m in metrics)
        )
        lines.append(
            f"{factor},supported,"
            + ",".join(str(by_metric[m].supported).lower() for m in metrics)
        )
    return "\n".join(lines) + "\n"


def _ranking_payload(ranking: list[MetricRanking]) -> list[dict]:
    return [
        {
            "metric": r.metric,
            "supported_count": r.supported_count,
            "support_magnitude": r.support_magnitude,
            "supported_factors": list(r.supported_factors),
            "rationale": r.rationale,
        }
        for r in ranking
    ]


def cmd_analyze(args) -> int:
    cfg = _config_from_args(args)
    table, iqa, ica = _build_score_table(args)
    results = {}
    for name in iqa + ica:
        polarity = Polarity.COMPLEXITY if name in ica else Polarity.QUALITY
        results[name] = evaluate_hypotheses(
            table, name, polarity, alpha=args.alpha, normalize=cfg.normalize_metrics
        )
    iqa_ranking = select_optimal({m: results[m] for m in iqa}) if iqa else []
    ica_ranking = select_optimal({m: results[m] for m in ica}) if ica else []

    out_prefix = Path(args.out)
    csv_path = out_prefix.with_suffix(".csv")
    json_path = out_prefix.with_suffix(".json")
    csv_path.write_text(_hypothesis_csv(results, iqa + ica), encoding="utf-8")
    payload = {
        "alpha": args.alpha,
        "metrics": {
            name: {
                "polarity": ("complexity" if name in ica else "quality"),
                "rows": [
                    {
                        "factor": r.factor.value,
                        "mean_diffs": {k: v for k, v in r.mean_diffs},
                        "p_value": r.p_value,
                        "supported": r.supported,
                        "test": r.test,
                    }
                    for r in results[name]
                ],
            }
            for name in iqa + ica
        },
        "iqa_ranking": _ranking_payload(iqa_ranking),
        "ica_ranking": _ranking_payload(ica_ranking),
        "selected_iqa": iqa_ranking[0].metric if iqa_ranking else None,
        "selected_ica": ica_ranking[0].metric if ica_ranking else None,
    }
    json_path.write_text(json.dumps(payload, indent=2) + "\n", encoding="utf-8")
    print(f"analysis -> {csv_path} and {json_path}")
    if payload["selected_iqa"]:
        print(f"optimal quality metric: {payload['selected_iqa']}")
    if payload["selected_ica"]:
        print(f"optimal complexity metric: {payload['selected_ica']}")
    return 0


def _load_xy(args, cfg: PipelineConfig) -> tuple[np.ndarray, np.ndarray, list[str]]:
    _, score_rows = _read_csv(args.scores)
    _, label_rows = _read_csv(args.labels)
    if not score_rows:
        _fail(f"{args.scores} has no data rows")
    labels = {}
    for i, row in enumerate(label_rows, start=2):
        labels[row["image_path"]] = _float_cell(row, "jaccard", args.labels, i)
    factors = cfg.regression.factors
    xs, ys, ids = [], [], []
    for i, row in enumerate(score_rows, start=2):
        rid = row["image_path"]
        if rid not in labels:
            _fail(f"no label row for image {rid!r}")
        xs.append([_float_cell(row, f"score_{f}", args.scores, i) for f in factors])
        ys.append(labels[rid])
        ids.append(rid)
    return np.array(xs, dtype=np.float64), np.array(ys, dtype=np.float64), ids


def _split_indices(n: int, train_fraction: float, seed: int) -> tuple[np.ndarray, np.ndarray]:
    rng = np.random.default_rng(seed)
    perm = rng.permutation(n)
    n_train = int(round(train_fraction * n))
    n_train = min(max(n_train, 1), n - 1) if n > 1 else n
    return np.sort(perm[:n_train]), np.sort(perm[n_train:])


def cmd_fit(args) -> int:
    cfg = _config_from_args(args)
    x, y, _ = _load_xy(args, cfg)
    reg = cfg.regression
    train_idx, test_idx = _split_indices(len(y), reg.train_fraction, cfg.seed)
    if len(test_idx) < 2:
        _fail(f"corpus of {len(y)} rows is too small for a {reg.train_fraction:.0%} split")
    model = fit_confidence_model(
        x[train_idx], y[train_idx], factors=reg.factors, degree=reg.degree, ridge=reg.ridge
    )
    model.save(args.model_out)
    train_eval = evaluate_model(model, x[train_idx], y[train_idx])
    test_eval = evaluate_model(model, x[test_idx], y[test_idx])
    payload = {
        "seed": cfg.seed,
        "train": {"mse": train_eval.mse, "r2": train_eval.r2, "n": train_eval.n},
        "test": {"mse": test_eval.mse, "r2": test_eval.r2, "n": test_eval.n},
    }
    eval_path = args.eval_out or str(args.model_out) + ".eval.json"
    Path(eval_path).write_text(json.dumps(payload, indent=2) + "\n", encoding="utf-8")
    if args.scatter_out:
        export_scatter(x, y, args.scatter_out, factors=reg.factors)
    print(
        f"model -> {args.model_out}"
        f" (train mse {train_eval.mse:.5f} r2 {train_eval.r2:.4f},"
        f" test mse {test_eval.mse:.5f} r2 {test_eval.r2:.4f})"
    )
    return 0


def cmd_predict(args) -> int:
    model = ConfidenceModel.load(args.model)
    header, rows = _read_csv(args.scores)
    if "confidence" in header:
        _fail(f"{args.scores} already has a confidence column")
    xs = []
    for i, row in enumerate(rows, start=2):
        xs.append([_float_cell(row, f"score_{f}", args.scores, i) for f in model.factors])
    preds, flags = model.predict(np.array(xs, dtype=np.float64))
    lines = [",".join(header + ["confidence"])]
    with open(args.scores, newline="", encoding="utf-8") as fh:
        raw = list(csv.reader(fh))[1:]
    for cells, p in zip(raw, preds):
        lines.append(",".join(cells + [repr(float(p))]))
    Path(args.out).write_text("\n".join(lines) + "\n", encoding="utf-8")
    note = " (some inputs outside the training range)" if flags["input_out_of_range"] else ""
    print(f"predicted {len(preds)} confidences -> {args.out}{note}")
    return 0


def cmd_ablate(args) -> int:
    cfg = _config_from_args(args)
    x, y, _ = _load_xy(args, cfg)
    reg = cfg.regression
    if tuple(reg.factors) != FACTOR_NAMES:
        _fail("ablation requires all six factors in the regression config")
    train_idx, test_idx = _split_indices(len(y), reg.train_fraction, cfg.seed)
    if len(test_idx) < 2:
        _fail(f"corpus of {len(y)} rows is too small for a {reg.train_fraction:.0%} split")
    rows = run_ablation(
        x[train_idx], y[train_idx], x[test_idx], y[test_idx],
        factors=reg.factors, degree=reg.degree, ridge=reg.ridge,
    )
    payload = {
        "seed": cfg.seed,
        "n_train": int(len(train_idx)),
        "n_test": int(len(test_idx)),
        "rows": [
            {
                "name": r.name,
                "factors": list(r.factors),
                "train_mse": r.train.mse,
                "train_r2": r.train.r2,
                "test_mse": r.test.mse,
                "test_r2": r.test.r2,
            }
            for r in rows
        ],
    }
    Path(args.out).write_text(json.dumps(payload, indent=2) + "\n", encoding="utf-8")
    print(f"ablation ({len(rows)} models) -> {args.out}")
    return 0


def cmd_report(args) -> int:
    try:
        payload = json.loads(Path(args.ablation).read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        _fail(f"{args.ablation} is not valid JSON: {exc}")
    rows = payload.get("rows")
    if not isinstance(rows, list) or not rows:
        _fail(f"{args.ablation} has no ablation rows")
    lines = ["factors,test_mse,test_r2"]
    table = []
    for i, row in enumerate(rows):
        try:
            factors = "+".join(f.upper() for f in row["factors"])
            mse = float(row["test_mse"])
            r2 = float(row["test_r2"])
        except (KeyError, TypeError, ValueError):
            _fail(f"{args.ablation} row {i} is malformed")
        lines.append(f"{factors},{mse!r},{r2!r}")
        table.append((factors, mse, r2))
    if args.out:
        Path(args.out).write_text("\n".join(lines) + "\n", encoding="utf-8")
    width = max(len(t[0]) for t in table)
    print(f"{'Factors':<{width}}  {'MSE':>8}  {'R2':>8}")
    for factors, mse, r2 in table:
        print(f"{factors:<{width}}  {mse:8.4f}  {r2:8.4f}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="countconf",
        description="Counting-confidence scoring, sensitivity analysis, and modeling.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p: argparse.ArgumentParser) -> None:
        p.add_argument("--config", help="JSON pipeline config file")
        p.add_argument("--seed", type=int, default=None, help="seed override")

    p = sub.add_parser("synth", help="generate a synthetic corpus")
    common(p)
    p.add_argument("--plan", choices=["single-variable", "confidence", "pristine"])
    p.add_argument("--plan-file", help="JSON list of scene specs")
    p.add_argument("--out", required=True, help="output corpus directory")
    p.add_argument("--groups", type=int, default=60, help="groups in the confidence plan")
    p.add_argument("--images", type=int, default=30, help="images in the pristine plan")
    p.add_argument("--no-stick", action="store_true", help="skip the stirring-tool overlay")
    p.add_argument("--no-degrade", action="store_true", help="emit undegraded stub detections")
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("score", help="compute per-image factor scores")
    common(p)
    p.add_argument("--manifest", required=True)
    p.add_argument("--detections", required=True)
    p.add_argument("--niqe-model", help="fitted quality-model JSON (default: bundled)")
    p.add_argument("--threads", type=int, default=None)
    p.add_argument("--out", required=True, help="output scores CSV")
    p.set_defaults(func=cmd_score)

    p = sub.add_parser("label", help="compute per-image confidence labels")
    common(p)
    p.add_argument("--manifest", required=True)
    p.add_argument("--detections", required=True)
    p.add_argument("--ground-truth", required=True)
    p.add_argument("--summary", help="corpus summary JSON path")
    p.add_argument("--out", required=True, help="output labels CSV")
    p.set_defaults(func=cmd_label)

    p = sub.add_parser("analyze", help="hypothesis-driven sensitivity analysis")
    common(p)
    p.add_argument("--scores", required=True)
    p.add_argument("--manifest", required=True)
    p.add_argument("--external", help="extra metric columns CSV joined on image_path")
    p.add_argument("--alpha", type=float, default=0.05)
    p.add_argument("--iqa-metrics", default=None, help="comma list of quality metrics")
    p.add_argument(
        "--ica-metrics", default=",".join(DEFAULT_ICA), help="comma list of complexity metrics"
    )
    p.add_argument("--out", required=True, help="report path prefix (.csv/.json)")
    p.set_defaults(func=cmd_analyze)

    p = sub.add_parser("fit", help="fit the confidence regression model")
    common(p)
    p.add_argument("--scores", required=True)
    p.add_argument("--labels", required=True)
    p.add_argument("--model-out", required=True)
    p.add_argument("--eval-out", help="train/test evaluation JSON path")
    p.add_argument("--scatter-out", help="per-factor scatter CSV path")
    p.set_defaults(func=cmd_fit)

    p = sub.add_parser("predict", help="append model confidences to a scores CSV")
    common(p)
    p.add_argument("--scores", required=True)
    p.add_argument("--model", required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_predict)

    p = sub.add_parser("ablate", help="per-factor ablation study")
    common(p)
    p.add_argument("--scores", required=True)
    p.add_argument("--labels", required=True)
    p.add_argument("--out", required=True, help="ablation JSON path")
    p.set_defaults(func=cmd_ablate)

    p = sub.add_parser("report", help="render an ablation JSON as a table")
    common(p)
    p.add_argument("--ablation", required=True)
    p.add_argument("--out", help="optional CSV path")
    p.set_defaults(func=cmd_report)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        code = exc.code if isinstance(exc.code, int) else 0
        return 0 if code == 0 else 1
    try:
        return args.func(args)
    except ValidationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except NumericalError as exc:
        print(f"numerical error: {exc}", file=sys.stderr)
        return 3
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
