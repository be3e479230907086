"""Command-line entry points.

Verbs: measure, oim, project, render, predict, fit, analyze, serve.
Results print as JSON on stdout; files land under the current directory
or DBL_DATA_DIR for relative paths.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from . import analysis
from .audio import StemPair, read_wav, write_wav
from .errors import DblError
from .glimpse import OimConfig, glimpse_proportion, score_at_attenuation
from .loudness import dialogue_activity, integrated_loudness, measure_ld
from .pipeline import load_run_config, read_ground_truth_csv, run_pipeline
from .predict import PRESETS, PredictorParams, fit_parameters, predict_pld
from .projection import project, projected_ld
from .remix import SessionManifest, StimulusRef, ManifestItem
from .service import ResultsStore, serve


def _print(payload: dict) -> None:
    json.dump(payload, sys.stdout, sort_keys=True, indent=2)
    sys.stdout.write("\n")


def _load_stems(fg_path: str, bg_path: str) -> StemPair:
    return StemPair(read_wav(fg_path), read_wav(bg_path))


def _oim_config(path: str | None) -> OimConfig:
    if path is None:
        return OimConfig()
    return OimConfig.from_json_dict(json.loads(Path(path).read_text()))


def _cmd_measure(args) -> None:
    fg = read_wav(args.fg)
    payload: dict = {"schema": "dbl-measure/1"}
    mask = dialogue_activity(fg, args.threshold_rel) if args.gate else None
    payload["fg"] = integrated_loudness(fg, mask).to_json_dict()
    if args.gate:
        payload["gating"] = {
            "threshold_rel_lu": args.threshold_rel,
            "active_blocks": mask.n_active,
            "total_blocks": len(mask.active),
            "rule": "stand-in block-energy detector on the dialogue stem",
        }
    if args.bg:
        bg = read_wav(args.bg)
        payload["bg"] = integrated_loudness(bg, mask).to_json_dict()
        if args.gate:
            payload["ld_lu"] = measure_ld(StemPair(fg, bg), mask)
        else:
            payload["ld_lu"] = payload["fg"]["integrated_lufs"] - payload["bg"]["integrated_lufs"]
    _print(payload)


def _cmd_oim(args) -> None:
    stems = _load_stems(args.fg, args.bg)
    config = _oim_config(args.config)
    if args.beta:
        score = score_at_attenuation(stems, args.beta, config)
    else:
        score = glimpse_proportion(stems.fg, stems.bg, config)
    payload = {"schema": "dbl-oim/1", "beta_db": args.beta}
    payload.update(score.to_json_dict())
    payload["config"] = config.to_json_dict()
    payload["note"] = "better-ear glimpse proportion; no distortion weighting"
    _print(payload)


def _cmd_project(args) -> None:
    mix_clip = read_wav(args.mix)
    refs = _load_stems(args.fg, args.bg)
    dec = project(mix_clip, refs, args.taps)
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    write_wav(dec.fg_part, out_dir / "fg_part.wav", "float32")
    write_wav(dec.bg_part, out_dir / "bg_part.wav", "float32")
    write_wav(dec.artifact, out_dir / "artifact.wav", "float32")
    payload = {
        "schema": "dbl-project/1",
        "filter_len": dec.filter_len,
        "component_rms": dec.component_rms(),
        "normal_eq_residual": dec.normal_eq_residual,
        "components": {
            "fg": str(out_dir / "fg_part.wav"),
            "bg": str(out_dir / "bg_part.wav"),
            "artifact": str(out_dir / "artifact.wav"),
        },
    }
    mask = dialogue_activity(refs.fg)
    payload["projected_ld_lu"] = projected_ld(mix_clip, refs, mask, decomposition=dec)
    _print(payload)


def _cmd_render(args) -> None:
    config = load_run_config(args.config)
    run_dir = run_pipeline(config)
    _print({"schema": "dbl-render/1", "run_dir": str(run_dir)})


def _params_from_args(args) -> PredictorParams:
    if args.preset:
        if args.preset not in PRESETS:
            raise DblError(f"unknown preset {args.preset!r}; have {sorted(PRESETS)}")
        return PRESETS[args.preset]
    return PredictorParams(args.xi, args.eps)


def _cmd_predict(args) -> None:
    stems = _load_stems(args.fg, args.bg)
    params = _params_from_args(args)
    pred = predict_pld(stems, params, config=_oim_config(args.config))
    payload = {"schema": "dbl-predict/1", "target_score": params.target_score, "offset_lu": params.offset_lu}
    payload.update(pred.to_json_dict())
    _print(payload)


def _read_corpus(path: str):
    raw = json.loads(Path(path).read_text())
    base = Path(path).parent
    item_ids, stems = [], []
    for it in raw["items"]:
        item_ids.append(it["item_id"])
        fg = base / it["fg"] if not Path(it["fg"]).is_absolute() else Path(it["fg"])
        bg = base / it["bg"] if not Path(it["bg"]).is_absolute() else Path(it["bg"])
        stems.append(_load_stems(str(fg), str(bg)))
    return item_ids, stems


def _cmd_fit(args) -> None:
    item_ids, stems = _read_corpus(args.corpus)
    truth_map = read_ground_truth_csv(args.truth)
    missing = [i for i in item_ids if i not in truth_map]
    if missing:
        raise DblError(f"ground truth missing items: {', '.join(missing)}")
    fit = fit_parameters(stems, [truth_map[i] for i in item_ids], config=_oim_config(args.config))
    payload = fit.to_json_dict()
    payload["schema"] = "dbl-fit/1"
    payload["item_ids"] = item_ids
    _print(payload)


def _cmd_analyze(args) -> None:
    records, item_lds = analysis.read_ratings_csv(args.ratings)
    plds = analysis.plds_from_records(records, item_lds)
    experience_map = analysis.subject_experience_map(records)
    classes = json.loads(Path(args.classes).read_text()) if args.classes else None
    tables = analysis.summarize(
        plds,
        item_class=classes,
        subject_experience=experience_map,
        experience=args.experience,
    )
    payload = tables.to_json_dict()
    payload["ground_truth_medians_lu"] = analysis.ground_truth_medians(plds, experience_map)
    if args.boxplot and classes:
        Path(args.boxplot).write_text(
            json.dumps(analysis.boxplot_data(plds, classes), sort_keys=True, indent=2) + "\n"
        )
    if args.out:
        Path(args.out).write_text(json.dumps(payload, sort_keys=True, indent=2) + "\n")
    _print(payload)


def _cmd_serve(args) -> None:
    raw = json.loads(Path(args.manifest).read_text())
    items = tuple(
        ManifestItem(
            item_id=it["item_id"],
            item_class=it["class"],
            stimuli=tuple(StimulusRef(s["id"], s["file"]) for s in it["stimuli"]),
            order=tuple(it["order"]),
            trial=bool(it.get("trial", False)),
            clipped_ids=tuple(it.get("clipped_ids", ())),
        )
        for it in raw["items"]
    )
    manifest = SessionManifest(seed=raw["seed"], items=items, subject_slot=raw.get("subject_slot", ""))
    stimulus_root = Path(args.stimuli) if args.stimuli else Path(args.manifest).parent
    store = ResultsStore(args.store)
    host, _, port = args.bind.partition(":")
    serve(manifest, stimulus_root, store, host or "127.0.0.1", int(port or 8171))


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="dbl", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("measure", help="integrated loudness and gated LD of stems")
    p.add_argument("--fg", required=True)
    p.add_argument("--bg")
    p.add_argument("--gate", action="store_true", help="apply dialogue gating from the FG stem")
    p.add_argument("--threshold-rel", type=float, default=20.0, dest="threshold_rel")
    p.set_defaults(func=_cmd_measure)

    p = sub.add_parser("oim", help="glimpse-proportion score of a stem pair")
    p.add_argument("--fg", required=True)
    p.add_argument("--bg", required=True)
    p.add_argument("--beta", type=float, default=0.0, help="BG attenuation in dB")
    p.add_argument("--config", help="metric config JSON")
    p.set_defaults(func=_cmd_oim)

    p = sub.add_parser("project", help="decompose a remix against reference stems")
    p.add_argument("--mix", required=True)
    p.add_argument("--fg", required=True)
    p.add_argument("--bg", required=True)
    p.add_argument("--taps", type=int, default=512)
    p.add_argument("--out-dir", default="projection", dest="out_dir")
    p.set_defaults(func=_cmd_project)

    p = sub.add_parser("render", help="run the pipeline for a run-config JSON")
    p.add_argument("--config", required=True)
    p.set_defaults(func=_cmd_render)

    p = sub.add_parser("predict", help="predict the preferred LD of one item")
    p.add_argument("--fg", required=True)
    p.add_argument("--bg", required=True)
    p.add_argument("--xi", type=float, default=0.5, help="target glimpse score")
    p.add_argument("--eps", type=float, default=13.2, help="offset in LU")
    p.add_argument("--preset", help=f"one of {sorted(PRESETS)}")
    p.add_argument("--config", help="metric config JSON")
    p.set_defaults(func=_cmd_predict)

    p = sub.add_parser("fit", help="fit (target, offset) on a corpus by MAE")
    p.add_argument("--corpus", required=True, help="corpus JSON with items[].fg/bg")
    p.add_argument("--truth", required=True, help="CSV with item_id,pld_lu")
    p.add_argument("--config", help="metric config JSON")
    p.set_defaults(func=_cmd_fit)

    p = sub.add_parser("analyze", help="summarize a ratings CSV")
    p.add_argument("--ratings", required=True)
    p.add_argument("--classes", help="JSON mapping item_id to class")
    p.add_argument("--experience", choices=[analysis.EXPERT, analysis.NON_EXPERT])
    p.add_argument("--out", help="write the summary JSON here as well")
    p.add_argument("--boxplot", help="write per-class boxplot data JSON here")
    p.set_defaults(func=_cmd_analyze)

    p = sub.add_parser("serve", help="serve sessions and collect ratings")
    p.add_argument("--manifest", required=True)
    p.add_argument("--stimuli", help="stimulus root (default: manifest directory)")
    p.add_argument("--store", required=True, help="append-only ratings JSONL")
    p.add_argument("--bind", default="127.0.0.1:8171")
    p.set_defaults(func=_cmd_serve)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        args.func(args)
    except DblError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
