"""Remix condition rendering and listening-session manifests.

A condition is the foreground mixed with the background attenuated by a
grid value; the standard grid runs 0..21 LU in 3 LU steps. Stimulus ids
are content hashes of (seed, item, condition index) so their ordering
carries no level information.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass

import numpy as np

from .audio import AudioClip, StemPair, apply_gain_db, mix
from .errors import EmptyItemListError
from .loudness import GatingMask, dialogue_activity, measure_ld

STANDARD_GRID = (0.0, 3.0, 6.0, 9.0, 12.0, 15.0, 18.0, 21.0)
ITEM_CLASSES = ("CoM", "CoA", "DoM", "DoA")


@dataclass(frozen=True)
class Condition:
    attenuation: float  # LU of BG attenuation
    nominal_ld: float  # LU, grid value relative to the aligned stems
    measured_ld: float  # LU, gated measurement on the rendered stems
    clipped: bool  # peak exceeded full scale


@dataclass(frozen=True)
class ConditionSet:
    item_id: str
    item_class: str
    conditions: tuple
    clips: tuple  # AudioClip per condition, parallel to conditions
    headroom_gain_db: float = 0.0
    trial: bool = False


@dataclass(frozen=True)
class StimulusRef:
    id: str
    file: str


@dataclass(frozen=True)
class ManifestItem:
    item_id: str
    item_class: str
    stimuli: tuple  # StimulusRef per condition index
    order: tuple  # presentation permutation of condition indices
    trial: bool = False
    clipped_ids: tuple = ()


@dataclass(frozen=True)
class SessionManifest:
    seed: int
    items: tuple
    subject_slot: str = ""

    def to_json_dict(self) -> dict:
        return {
            "schema": "dbl-session-manifest/1",
            "seed": self.seed,
            "subject_slot": self.subject_slot,
            "items": [
                {
                    "item_id": it.item_id,
                    "class": it.item_class,
                    "stimuli": [{"id": s.id, "file": s.file} for s in it.stimuli],
                    "order": list(it.order),
                    "trial": it.trial,
                    "clipped_ids": list(it.clipped_ids),
                }
                for it in self.items
            ],
        }

    def to_json_bytes(self) -> bytes:
        return (json.dumps(self.to_json_dict(), sort_keys=True, indent=2) + "\n").encode()


def render_condition(stems: StemPair, attenuation: float) -> AudioClip:
    """fg + bg scaled by 10^(-attenuation/20). Clipping is not limited here."""
    return mix(stems.fg, apply_gain_db(stems.bg, -attenuation))


def render_condition_set(
    stems: StemPair,
    item_id: str,
    item_class: str,
    grid=STANDARD_GRID,
    mask: GatingMask | None = None,
    headroom: bool = False,
    trial: bool = False,
) -> ConditionSet:
    """Render the full condition grid with measured gated LDs.

    With headroom=True and any condition peaking over full scale, one
    equal gain is applied to all conditions of the item (equal gain
    leaves every LD unchanged) to bring the worst peak to 0 dBFS.
    """
    if mask is None:
        mask = dialogue_activity(stems.fg)

    rendered = [render_condition(stems, a) for a in grid]
    headroom_gain = 0.0
    peak = max(float(np.max(np.abs(c.data))) for c in rendered)
    if headroom and peak > 1.0:
        headroom_gain = -20.0 * np.log10(peak)
        stems = StemPair(
            apply_gain_db(stems.fg, headroom_gain), apply_gain_db(stems.bg, headroom_gain)
        )
        rendered = [render_condition(stems, a) for a in grid]

    conditions = []
    for a, clip in zip(grid, rendered):
        measured = measure_ld(StemPair(stems.fg, apply_gain_db(stems.bg, -a)), mask)
        clipped = bool(np.max(np.abs(clip.data)) > 1.0)
        conditions.append(
            Condition(attenuation=float(a), nominal_ld=float(a), measured_ld=measured, clipped=clipped)
        )

    lds = [c.measured_ld for c in conditions]
    if any(b <= a for a, b in zip(lds, lds[1:])):
        raise ValueError(f"{item_id}: measured LDs are not strictly increasing: {lds}")

    return ConditionSet(
        item_id=item_id,
        item_class=item_class,
        conditions=tuple(conditions),
        clips=tuple(rendered),
        headroom_gain_db=headroom_gain,
        trial=trial,
    )


def stimulus_id(seed: int, item_id: str, condition_index: int) -> str:
    digest = hashlib.sha256(f"{seed}|{item_id}|{condition_index}".encode()).hexdigest()
    return digest[:16]


def build_session(items: list, seed: int, subject_slot: str = "") -> SessionManifest:
    """Assign opaque stimulus ids and a per-item presentation permutation.

    Deterministic: the same seed and items yield an identical manifest.
    """
    if not items:
        raise EmptyItemListError("a session needs at least one item")
    rng = np.random.default_rng(seed)
    manifest_items = []
    for cs in items:
        n = len(cs.conditions)
        order = tuple(int(i) for i in rng.permutation(n))
        stimuli = []
        clipped_ids = []
        for k, cond in enumerate(cs.conditions):
            sid = stimulus_id(seed, cs.item_id, k)
            stimuli.append(StimulusRef(id=sid, file=f"stimuli/{sid}.wav"))
            if cond.clipped:
                clipped_ids.append(sid)
        manifest_items.append(
            ManifestItem(
                item_id=cs.item_id,
                item_class=cs.item_class,
                stimuli=tuple(stimuli),
                order=order,
                trial=cs.trial,
                clipped_ids=tuple(clipped_ids),
            )
        )
    return SessionManifest(seed=seed, items=tuple(manifest_items), subject_slot=subject_slot)
