"""Batch pipeline: from stem files to stimuli, manifests, and reports.

A run directory is reproducible end to end: the same config and seed
produce a byte-identical manifest and bit-identical numeric reports, so
no report contains wall-clock data.
"""

from __future__ import annotations

import csv
import json
import os
import shutil
from dataclasses import dataclass, field
from pathlib import Path

from .audio import StemPair, apply_gain_db, read_wav, write_wav
from .errors import DblError
from .glimpse import OimConfig, score_curve
from .loudness import dialogue_activity, integrated_loudness, measure_ld, normalize_to
from .predict import PRESETS, ItemSearcher, fit_parameters
from .projection import Projector, projected_ld
from .remix import build_session, render_condition_set

DATA_DIR_ENV = "DBL_DATA_DIR"
RUN_CONFIG_SCHEMA = "dbl-run-config/1"


@dataclass(frozen=True)
class ItemSpec:
    item_id: str
    item_class: str
    fg: Path
    bg: Path
    trial: bool = False


@dataclass(frozen=True)
class RunConfig:
    seed: int
    out_dir: Path
    items: tuple
    target_lufs: float = -23.0
    headroom: bool = False
    projection: bool = True
    oim: bool = True
    filter_len: int = 512
    oim_config: OimConfig = field(default_factory=OimConfig)
    ground_truth: Path | None = None
    presets: tuple = tuple(sorted(PRESETS))


def _resolve(path: str, base: Path) -> Path:
    p = Path(path)
    return p if p.is_absolute() else base / p


def data_root() -> Path:
    return Path(os.environ.get(DATA_DIR_ENV, "."))


def load_run_config(path: str | Path) -> RunConfig:
    path = Path(path)
    raw = json.loads(path.read_text())
    if raw.get("schema") != RUN_CONFIG_SCHEMA:
        raise ValueError(f"{path}: expected schema {RUN_CONFIG_SCHEMA!r}, got {raw.get('schema')!r}")
    base = path.parent
    items = tuple(
        ItemSpec(
            item_id=it["item_id"],
            item_class=it["class"],
            fg=_resolve(it["fg"], base),
            bg=_resolve(it["bg"], base),
            trial=bool(it.get("trial", False)),
        )
        for it in raw["items"]
    )
    out_dir = Path(raw["out_dir"])
    if not out_dir.is_absolute():
        out_dir = data_root() / out_dir
    stages = raw.get("stages", {})
    return RunConfig(
        seed=int(raw["seed"]),
        out_dir=out_dir,
        items=items,
        target_lufs=float(raw.get("target_lufs", -23.0)),
        headroom=bool(raw.get("headroom", False)),
        projection=bool(stages.get("projection", True)),
        oim=bool(stages.get("oim", True)),
        filter_len=int(raw.get("filter_len", 512)),
        oim_config=OimConfig.from_json_dict(raw.get("oim_config", {})),
        ground_truth=_resolve(raw["ground_truth"], base) if raw.get("ground_truth") else None,
        presets=tuple(raw.get("presets", sorted(PRESETS))),
    )


def read_ground_truth_csv(path: str | Path) -> dict:
    """CSV with columns item_id,pld_lu."""
    out = {}
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        missing = {"item_id", "pld_lu"} - set(reader.fieldnames or ())
        if missing:
            raise ValueError(f"{path}: missing columns {sorted(missing)}")
        for row in reader:
            out[row["item_id"]] = float(row["pld_lu"])
    return out


def _dump_json(path: Path, payload: dict) -> None:
    path.write_text(json.dumps(payload, sort_keys=True, indent=2) + "\n")


def run_pipeline(config: RunConfig) -> Path:
    """Execute the full pipeline into config.out_dir.

    Per item: normalize FG to the target loudness, align the BG so the
    gated LD starts at 0 LU, render the condition grid, then measure,
    optionally project and score each condition. Predictions and the
    parameter fit run only when ground truth is configured. On any
    failure the partially written run directory is removed.
    """
    run_dir = config.out_dir
    if run_dir.exists() and any(run_dir.iterdir()):
        raise FileExistsError(f"run directory {run_dir} is not empty")
    run_dir.mkdir(parents=True, exist_ok=True)
    try:
        return _run(config, run_dir)
    except BaseException:
        shutil.rmtree(run_dir, ignore_errors=True)
        raise


def _run(config: RunConfig, run_dir: Path) -> Path:
    (run_dir / "stimuli").mkdir()

    condition_sets = []
    stems_by_item = {}
    masks_by_item = {}
    loudness_rows = {}
    for spec in config.items:
        fg = read_wav(spec.fg)
        bg = read_wav(spec.bg)
        fg_in = integrated_loudness(fg).integrated
        fg_n, fg_gain = normalize_to(fg, config.target_lufs)
        mask = dialogue_activity(fg_n)
        fg_gated = integrated_loudness(fg_n, mask).integrated
        bg_gated = integrated_loudness(bg, mask).integrated
        bg_gain = fg_gated - bg_gated  # start the grid at a gated LD of 0
        bg_n = apply_gain_db(bg, bg_gain)
        stems = StemPair(fg_n, bg_n)
        stems_by_item[spec.item_id] = stems
        masks_by_item[spec.item_id] = mask
        cs = render_condition_set(
            stems,
            spec.item_id,
            spec.item_class,
            mask=mask,
            headroom=config.headroom,
            trial=spec.trial,
        )
        condition_sets.append(cs)
        loudness_rows[spec.item_id] = {
            "fg_input_lufs": fg_in,
            "fg_gain_db": fg_gain,
            "bg_align_gain_db": bg_gain,
            "headroom_gain_db": cs.headroom_gain_db,
            "base_gated_ld_lu": measure_ld(stems, mask),
            "active_blocks": int(mask.n_active),
            "total_blocks": int(len(mask.active)),
            "gating_rule": "block loudness within 20 LU of stem integrated loudness",
        }

    manifest = build_session(condition_sets, config.seed)
    (run_dir / "manifest.json").write_bytes(manifest.to_json_bytes())

    for cs, m_item in zip(condition_sets, manifest.items):
        for clip, ref in zip(cs.clips, m_item.stimuli):
            write_wav(clip, run_dir / ref.file, "float32")

    conditions_payload = {}
    for cs, m_item in zip(condition_sets, manifest.items):
        stems = stems_by_item[cs.item_id]
        mask = masks_by_item[cs.item_id]
        projector = Projector(stems, config.filter_len) if config.projection else None
        searcher = None
        rows = []
        for cond, clip, ref in zip(cs.conditions, cs.clips, m_item.stimuli):
            row = {
                "id": ref.id,
                "attenuation_lu": cond.attenuation,
                "nominal_ld_lu": cond.nominal_ld,
                "measured_ld_lu": cond.measured_ld,
                "clipped": cond.clipped,
            }
            if projector is not None:
                dec = projector.project(clip)
                row["projected_ld_lu"] = projected_ld(
                    clip, stems, mask, decomposition=dec
                )
            rows.append(row)
        if config.oim:
            scores = score_curve(
                stems, [c.attenuation for c in cs.conditions], config.oim_config
            )
            for row, s in zip(rows, scores):
                row["glimpse_score"] = s.value
        conditions_payload[cs.item_id] = {
            "class": cs.item_class,
            "headroom_gain_db": cs.headroom_gain_db,
            "stimuli": rows,
        }
    _dump_json(
        run_dir / "conditions.json",
        {"schema": "dbl-conditions/1", "items": conditions_payload},
    )
    _dump_json(run_dir / "loudness.json", {"schema": "dbl-loudness/1", "items": loudness_rows})

    stages = ["normalize", "render", "manifest"]
    if config.projection:
        stages.append("projection")
    if config.oim:
        stages.append("oim")

    notices = []
    if config.ground_truth is not None:
        truth_map = read_ground_truth_csv(config.ground_truth)
        missing = [s.item_id for s in config.items if s.item_id not in truth_map]
        if missing:
            raise DblError(f"ground truth missing items: {', '.join(missing)}")
        item_ids = [s.item_id for s in config.items]
        searchers = {
            i: ItemSearcher(stems_by_item[i], config.oim_config, masks_by_item[i])
            for i in item_ids
        }
        predictions = {}
        for name in config.presets:
            params = PRESETS[name]
            rows = {}
            for i in item_ids:
                ld, reached = searchers[i].search(params.target_score)
                rows[i] = {
                    "searched_ld_lu": ld,
                    "predicted_pld_lu": ld + params.offset_lu,
                    "reached": reached,
                }
            predictions[name] = {
                "target_score": params.target_score,
                "offset_lu": params.offset_lu,
                "items": rows,
            }
        _dump_json(
            run_dir / "predictions.json",
            {"schema": "dbl-predictions/1", "presets": predictions},
        )
        fit = fit_parameters(
            [stems_by_item[i] for i in item_ids],
            [truth_map[i] for i in item_ids],
            config=config.oim_config,
            masks=[masks_by_item[i] for i in item_ids],
        )
        payload = fit.to_json_dict()
        payload["schema"] = "dbl-fit/1"
        payload["item_ids"] = item_ids
        _dump_json(run_dir / "fit.json", payload)
        stages += ["predict", "fit"]
    else:
        notices.append("no ground truth configured; prediction and fit stages skipped")

    files = sorted(
        str(p.relative_to(run_dir)) for p in run_dir.rglob("*") if p.is_file()
    )
    _dump_json(
        run_dir / "index.json",
        {
            "schema": "dbl-run-index/1",
            "seed": config.seed,
            "stages": stages,
            "notices": notices,
            "files": files + ["index.json"],
        },
    )
    for notice in notices:
        print(f"notice: {notice}")
    return run_dir
