"""Label-map codec: palette, quantization, part masks, partial labels, background ops.

A label map is an H x W x 3 float32 image in [0, 1].  A *quantized* label map
contains only the 11 palette colors, each class one exact color.  All editing
machinery (masks, partial labels, compositing) requires quantized inputs.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from .errors import ShapeMismatch, UnquantizedLabel

PALETTE_VERSION = "v1"

# Class order is fixed; colors chosen maximally separated so that regression
# outputs quantize unambiguously.
CLASS_COLORS: tuple[tuple[str, tuple[int, int, int]], ...] = (
    ("background", (0, 0, 0)),
    ("hair", (255, 0, 0)),
    ("eyebrows", (0, 255, 0)),
    ("eyes", (0, 0, 255)),
    ("nose", (255, 255, 0)),
    ("upper_lip", (255, 0, 255)),
    ("lower_lip", (128, 0, 255)),
    ("teeth", (255, 255, 255)),
    ("face_skin", (0, 255, 255)),
    ("body_skin", (255, 128, 0)),
    ("clothes", (128, 128, 128)),
)

PART_NAMES: tuple[str, ...] = ("hair", "eyebrows", "eyes", "nose", "mouth", "face", "body")
NUM_PARTS = len(PART_NAMES)

# part -> class names; background belongs to no part
PART_GROUPS: dict[str, tuple[str, ...]] = {
    "hair": ("hair",),
    "eyebrows": ("eyebrows",),
    "eyes": ("eyes",),
    "nose": ("nose",),
    "mouth": ("upper_lip", "lower_lip", "teeth"),
    "face": ("face_skin",),
    "body": ("body_skin", "clothes"),
}

BACKGROUND_FILL = 0.5  # mid-gray fill for background-removed conditional inputs


def part_index(part: int | str) -> int:
    """Normalize a part given by index or name to its index (0-6)."""
    if isinstance(part, str):
        if part not in PART_NAMES:
            raise ValueError(f"unknown part {part!r}; expected one of {PART_NAMES}")
        return PART_NAMES.index(part)
    idx = int(part)
    if not 0 <= idx < NUM_PARTS:
        raise ValueError(f"part index {idx} out of range 0..{NUM_PARTS - 1}")
    return idx


@dataclass(frozen=True)
class Palette:
    """The 11-class color table and the 7-part grouping."""

    class_colors: tuple[tuple[str, tuple[int, int, int]], ...] = CLASS_COLORS
    part_groups: dict[str, tuple[str, ...]] = field(default_factory=lambda: dict(PART_GROUPS))
    version: str = PALETTE_VERSION

    @property
    def class_names(self) -> list[str]:
        return [name for name, _ in self.class_colors]

    def colors_u8(self) -> np.ndarray:
        """(11, 3) uint8 color table in class order."""
        return np.array([c for _, c in self.class_colors], dtype=np.uint8)

    def colors_f32(self) -> np.ndarray:
        """(11, 3) float32 color table in [0, 1]."""
        return self.colors_u8().astype(np.float32) / 255.0

    def class_id(self, name: str) -> int:
        return self.class_names.index(name)

    def part_class_ids(self, part: int | str) -> list[int]:
        name = PART_NAMES[part_index(part)]
        return [self.class_id(c) for c in self.part_groups[name]]

    def to_json(self) -> str:
        """Versioned palette document consumed by the web client."""
        doc = {
            "version": self.version,
            "classes": [{"name": n, "rgb": list(c)} for n, c in self.class_colors],
            "parts": {p: list(g) for p, g in self.part_groups.items()},
            "part_order": list(PART_NAMES),
        }
        return json.dumps(doc, indent=2, sort_keys=True)


PALETTE = Palette()
_COLORS_F32 = PALETTE.colors_f32()  # (11, 3)


@dataclass
class LabelMap:
    """H x W x 3 float32 label image in [0, 1] plus a quantized flag."""

    pixels: np.ndarray
    quantized: bool = False

    def __post_init__(self):
        px = np.asarray(self.pixels, dtype=np.float32)
        if px.ndim != 3 or px.shape[2] != 3:
            raise ShapeMismatch(f"label map must be HxWx3, got {px.shape}")
        self.pixels = px

    @property
    def resolution(self) -> tuple[int, int]:
        return self.pixels.shape[0], self.pixels.shape[1]

    @classmethod
    def from_uint8(cls, arr: np.ndarray, quantized: bool = True) -> "LabelMap":
        return cls(arr.astype(np.float32) / 255.0, quantized=quantized)

    def to_uint8(self) -> np.ndarray:
        return np.clip(np.rint(self.pixels * 255.0), 0, 255).astype(np.uint8)

    def class_ids(self) -> np.ndarray:
        """(H, W) int array of palette class ids; requires quantized pixels."""
        if not self.quantized:
            raise UnquantizedLabel("class_ids requires a quantized label map")
        d = self.pixels[:, :, None, :] - _COLORS_F32[None, None, :, :]
        return np.argmin(np.einsum("hwkc,hwkc->hwk", d, d), axis=2)


def quantize(raw: np.ndarray | LabelMap) -> LabelMap:
    """Snap every pixel to the nearest palette color (squared-RGB distance)."""
    px = raw.pixels if isinstance(raw, LabelMap) else np.asarray(raw, dtype=np.float32)
    if px.ndim != 3 or px.shape[2] != 3:
        raise ShapeMismatch(f"expected HxWx3 image, got {px.shape}")
    if not np.all(np.isfinite(px)):
        raise ValueError("label pixels must be finite")
    d = px[:, :, None, :].astype(np.float32) - _COLORS_F32[None, None, :, :]
    ids = np.argmin(np.einsum("hwkc,hwkc->hwk", d, d), axis=2)
    return LabelMap(_COLORS_F32[ids], quantized=True)


def _require_quantized(label: LabelMap) -> None:
    if not isinstance(label, LabelMap) or not label.quantized:
        raise UnquantizedLabel("operation requires a quantized LabelMap")


def part_mask(label: LabelMap, part: int | str) -> np.ndarray:
    """(H, W) uint8 mask of pixels whose class belongs to the part's group."""
    _require_quantized(label)
    ids = label.class_ids()
    mask = np.zeros(ids.shape, dtype=np.uint8)
    for cid in PALETTE.part_class_ids(part):
        mask |= (ids == cid).astype(np.uint8)
    return mask


def background_mask(label: LabelMap) -> np.ndarray:
    _require_quantized(label)
    return (label.class_ids() == PALETTE.class_id("background")).astype(np.uint8)


def partial_label(label: LabelMap, part: int | str) -> LabelMap:
    """Keep the part's class colors; everything else becomes background."""
    _require_quantized(label)
    mask = part_mask(label, part).astype(bool)
    out = np.zeros_like(label.pixels)
    out[mask] = label.pixels[mask]
    return LabelMap(out, quantized=True)


def editing_mask(label_a: LabelMap, label_b: LabelMap, part: int | str) -> np.ndarray:
    """Pixelwise union of the part's masks in both labels: the allowed edit area."""
    _require_quantized(label_a)
    _require_quantized(label_b)
    if label_a.resolution != label_b.resolution:
        raise ShapeMismatch(
            f"label resolutions differ: {label_a.resolution} vs {label_b.resolution}"
        )
    return part_mask(label_a, part) | part_mask(label_b, part)


def remove_background(image: np.ndarray, label: LabelMap) -> np.ndarray:
    """Replace background-labeled pixels with the mid-gray fill value."""
    _require_quantized(label)
    img = np.asarray(image, dtype=np.float32)
    if img.shape[:2] != label.resolution:
        raise ShapeMismatch(f"image {img.shape[:2]} vs label {label.resolution}")
    bg = background_mask(label).astype(bool)
    out = img.copy()
    out[bg] = BACKGROUND_FILL
    return out


def composite_background(
    generated: np.ndarray,
    receptor_image: np.ndarray,
    receptor_label: LabelMap,
    generated_label: LabelMap,
) -> np.ndarray:
    """Generated foreground (per its label) over the receptor's original pixels."""
    _require_quantized(receptor_label)
    _require_quantized(generated_label)
    gen = np.asarray(generated, dtype=np.float32)
    rec = np.asarray(receptor_image, dtype=np.float32)
    if gen.shape != rec.shape or gen.shape[:2] != generated_label.resolution \
            or rec.shape[:2] != receptor_label.resolution:
        raise ShapeMismatch("composite_background inputs must share one resolution")
    fg = ~background_mask(generated_label).astype(bool)
    out = rec.copy()
    out[fg] = gen[fg]
    return out
