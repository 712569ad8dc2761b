"""Procedural cartoon-face generator with pixel-exact ground-truth label maps.

Faces are 2-D parametric cartoons (ellipses, polygons, curved bands).  Identity
factors (face ellipse, skin tone, eye spacing, baseline nose size) are shared
across renders of the same identity id; per-part style parameters vary per
image.  Every shape's geometry depends only on the identity parameters and its
own part's parameters, and shapes are drawn in a fixed z-order, so editing one
part never moves the label pixels of another part outside the edited region.

Labels are rasterized directly at the target resolution with no anti-aliasing;
images are drawn at 2x and box-downsampled.
"""

from __future__ import annotations

import dataclasses
import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from PIL import Image, ImageDraw

from . import labelspace
from .labelspace import PALETTE, PART_NAMES, LabelMap

ALLOWED_RESOLUTIONS = (32, 64, 128, 256)

HAIR_TEMPLATES = ("buzz", "bob", "side_part", "long", "spiky")

# image-only style tables
_HAIR_COLORS = (
    (0.24, 0.16, 0.10),  # dark brown
    (0.10, 0.09, 0.09),  # black
    (0.45, 0.26, 0.13),  # chestnut
    (0.83, 0.69, 0.38),  # blonde
    (0.52, 0.20, 0.12),  # auburn
)
_CLOTHES_COLORS = (
    (0.22, 0.34, 0.58),
    (0.26, 0.48, 0.30),
    (0.62, 0.24, 0.22),
    (0.44, 0.30, 0.54),
    (0.72, 0.58, 0.22),
    (0.20, 0.52, 0.54),
)
_BG_TOP = (0.93, 0.94, 0.96)
_BG_BOTTOM = (0.80, 0.84, 0.90)

_IDENTITY_STREAM = 0xFACE0001  # salt for the global identity table
_SPLIT_STREAM = 0x5eed5_011


# ---------------------------------------------------------------------------
# parameter blocks


@dataclass(frozen=True)
class IdentityParams:
    face_rx: float      # face half-width, [0.155, 0.225]
    face_ry: float      # face half-height, [0.21, 0.285]
    skin_tone: float    # [0, 1], light..dark warm ramp
    eye_spacing: float  # half-distance between eye centers, [0.055, 0.095]
    nose_base: float    # baseline nose half-width, [0.018, 0.030]


@dataclass(frozen=True)
class HairParams:
    template: int       # index into HAIR_TEMPLATES
    extent: float       # [0, 1], volume/length


@dataclass(frozen=True)
class BrowParams:
    thickness: float    # [0.006, 0.014]
    angle: float        # [-0.35, 0.35] rad, mirrored between sides


@dataclass(frozen=True)
class EyeParams:
    radius: float       # [0.013, 0.024]


@dataclass(frozen=True)
class NoseParams:
    width_scale: float  # [0.7, 1.4] of the identity baseline
    height: float       # [0.030, 0.055]


@dataclass(frozen=True)
class MouthParams:
    openness: float     # 0 (closed, no teeth) or [0.010, 0.026]
    smile: float        # [-0.40, 0.55] curvature


@dataclass(frozen=True)
class FacePartParams:
    jaw: float          # [0.85, 1.15] lower-face width factor
    chin: float         # [0, 1] chin elongation


@dataclass(frozen=True)
class BodyParams:
    shoulder: float     # [0.9, 1.3] shoulder half-width factor
    clothes_color: int  # index into the clothes color table


_PART_FIELDS = ("hair", "eyebrows", "eyes", "nose", "mouth", "face", "body")


@dataclass(frozen=True)
class FaceSpec:
    """Full parametric description of one rendered face."""

    seed: int
    identity_id: int
    identity: IdentityParams
    hair: HairParams
    eyebrows: BrowParams
    eyes: EyeParams
    nose: NoseParams
    mouth: MouthParams
    face: FacePartParams
    body: BodyParams

    def part_params(self, part: int | str):
        return getattr(self, _PART_FIELDS[labelspace.part_index(part)])

    def to_dict(self) -> dict:
        return dataclasses.asdict(self)

    @classmethod
    def from_dict(cls, d: dict) -> "FaceSpec":
        return cls(
            seed=int(d["seed"]),
            identity_id=int(d["identity_id"]),
            identity=IdentityParams(**d["identity"]),
            hair=HairParams(**d["hair"]),
            eyebrows=BrowParams(**d["eyebrows"]),
            eyes=EyeParams(**d["eyes"]),
            nose=NoseParams(**d["nose"]),
            mouth=MouthParams(**d["mouth"]),
            face=FacePartParams(**d["face"]),
            body=BodyParams(**d["body"]),
        )


# ---------------------------------------------------------------------------
# sampling


def _rng(*key: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(key)))


def sample_identity(identity_id: int) -> IdentityParams:
    """Identity factors form a fixed global table indexed by identity id."""
    r = _rng(_IDENTITY_STREAM, identity_id)
    return IdentityParams(
        face_rx=float(r.uniform(0.155, 0.225)),
        face_ry=float(r.uniform(0.210, 0.285)),
        skin_tone=float(r.uniform(0.0, 1.0)),
        eye_spacing=float(r.uniform(0.055, 0.095)),
        nose_base=float(r.uniform(0.018, 0.030)),
    )


def _sample_part(part: int, r: np.random.Generator):
    if part == 0:
        return HairParams(template=int(r.integers(len(HAIR_TEMPLATES))),
                          extent=float(r.uniform(0.0, 1.0)))
    if part == 1:
        return BrowParams(thickness=float(r.uniform(0.006, 0.014)),
                          angle=float(r.uniform(-0.35, 0.35)))
    if part == 2:
        return EyeParams(radius=float(r.uniform(0.013, 0.024)))
    if part == 3:
        return NoseParams(width_scale=float(r.uniform(0.7, 1.4)),
                          height=float(r.uniform(0.030, 0.055)))
    if part == 4:
        # closed-mouth prior: the source data gives no teeth statistics, so the
        # open/closed mix is our choice
        openness = 0.0 if r.uniform() < 0.35 else float(r.uniform(0.010, 0.026))
        return MouthParams(openness=openness, smile=float(r.uniform(-0.40, 0.55)))
    if part == 5:
        return FacePartParams(jaw=float(r.uniform(0.85, 1.15)),
                              chin=float(r.uniform(0.0, 1.0)))
    if part == 6:
        return BodyParams(shoulder=float(r.uniform(0.9, 1.3)),
                          clothes_color=int(r.integers(len(_CLOTHES_COLORS))))
    raise ValueError(f"bad part index {part}")


def _spec_for_identity(seed: int, identity_id: int) -> FaceSpec:
    r = _rng(int(seed), 0x9A27)
    parts = [_sample_part(p, r) for p in range(7)]
    return FaceSpec(seed=int(seed), identity_id=int(identity_id),
                    identity=sample_identity(identity_id),
                    hair=parts[0], eyebrows=parts[1], eyes=parts[2], nose=parts[3],
                    mouth=parts[4], face=parts[5], body=parts[6])


def sample_spec(seed: int, identity_pool: int) -> FaceSpec:
    """Draw a FaceSpec; the identity is one of `identity_pool` reusable ids."""
    if identity_pool < 1:
        raise ValueError("identity_pool must be >= 1")
    r = _rng(int(seed), 0x1D)
    identity_id = int(r.integers(identity_pool))
    return _spec_for_identity(seed, identity_id)


def mutate_part(spec: FaceSpec, part: int | str, seed: int) -> FaceSpec:
    """Resample one part's style parameters; everything else is untouched."""
    idx = labelspace.part_index(part)
    r = _rng(int(seed), 0xA17E, idx)
    new = _sample_part(idx, r)
    return dataclasses.replace(spec, **{_PART_FIELDS[idx]: new})


# ---------------------------------------------------------------------------
# geometry

_FACE_CX = 0.5
_FACE_CY = 0.46


@dataclass
class _Shape:
    class_name: str | None   # None = image-only decoration
    kind: str                 # "ellipse" | "polygon"
    geom: tuple               # ellipse: (cx, cy, rx, ry); polygon: pts tuple
    color: tuple[float, float, float]  # image color


def _skin_rgb(tone: float) -> tuple[float, float, float]:
    light = np.array([0.98, 0.86, 0.74])
    dark = np.array([0.55, 0.38, 0.26])
    return tuple((light + (dark - light) * tone).tolist())


def _face_outline(ident: IdentityParams, fp: FacePartParams, n: int = 72):
    """Closed polygon of the face boundary; jaw/chin modify the lower half only."""
    cx, cy = _FACE_CX, _FACE_CY
    pts = []
    for k in range(n):
        th = 2.0 * math.pi * k / n
        s = math.sin(th)  # y-down: s > 0 is the lower half
        low = max(0.0, s)
        rx = ident.face_rx * (1.0 + (fp.jaw - 1.0) * low)
        ry = ident.face_ry * (1.0 + 0.10 * fp.chin * low * low)
        pts.append((cx + rx * math.cos(th), cy + ry * s))
    return tuple(pts)


def _hairline_y(ident: IdentityParams) -> float:
    return _FACE_CY - max(0.105, 0.42 * ident.face_ry)


def _min_px(value: float, resolution: int, px: float = 1.0) -> float:
    return max(value, px / resolution)


def _hair_cap(ident: IdentityParams, hp: HairParams, resolution: int):
    """Front hair volume: face region above the hairline plus an outer band."""
    cx, cy = _FACE_CX, _FACE_CY
    band = _min_px(0.018 + 0.05 * hp.extent, resolution, 1.5)
    y_line = _hairline_y(ident)
    rx, ry = ident.face_rx + band, ident.face_ry + band
    # outer arc over the top of the head, between the hairline crossings
    s_line = (y_line - cy) / ry
    s_line = max(-0.999, min(0.999, s_line))
    th_r = math.asin(s_line)            # right crossing, upper half (negative angle)
    th_l = math.pi - th_r               # left crossing
    # walk from the left crossing over the top of the head to the right one
    # (angles decreasing from th_l through -pi/2 keeps the arc above the line)
    n = 48
    angles = [th_l + (th_r - 2 * math.pi - th_l) * k / n for k in range(n + 1)]
    poly = [(cx + rx * math.cos(t), cy + ry * math.sin(t)) for t in angles]
    return tuple(poly)


def _hair_shapes(ident: IdentityParams, hp: HairParams, resolution: int):
    """Returns (back_layer, front_layer) lists of _Shape."""
    cx, cy = _FACE_CX, _FACE_CY
    color = _HAIR_COLORS[hp.template]
    shade = tuple(min(1.0, c * (0.85 + 0.3 * hp.extent)) for c in color)
    cap = _Shape("hair", "polygon", _hair_cap(ident, hp, resolution), shade)
    template = HAIR_TEMPLATES[hp.template]
    back: list[_Shape] = []
    front: list[_Shape] = [cap]
    band = _min_px(0.018 + 0.05 * hp.extent, resolution, 1.5)
    if template == "bob":
        drop = cy + ident.face_ry * (0.05 + 0.45 * hp.extent)
        for side in (-1, 1):
            x_in = cx + side * (ident.face_rx * 0.88)
            x_out = cx + side * (ident.face_rx + band)
            y_top = _hairline_y(ident)
            back.append(_Shape("hair", "polygon",
                               ((x_in, y_top), (x_out, y_top), (x_out, drop), (x_in, drop)),
                               shade))
    elif template == "long":
        top = cy - ident.face_ry - band
        bottom = cy + ident.face_ry * (0.55 + 0.75 * hp.extent)
        w = ident.face_rx + band + 0.045
        back.append(_Shape("hair", "ellipse",
                           (cx, cy - ident.face_ry * 0.35, w, ident.face_ry * 0.75), shade))
        back.append(_Shape("hair", "polygon",
                           ((cx - w, cy - ident.face_ry * 0.35), (cx + w, cy - ident.face_ry * 0.35),
                            (cx + w * 0.92, bottom), (cx - w * 0.92, bottom)),
                           shade))
        _ = top
    elif template == "side_part":
        # one bang sweeping from the hairline toward (but not reaching) the brows
        y0 = _hairline_y(ident)
        y1 = y0 + 0.55 * ((_FACE_CY - 0.095) - y0)
        front.append(_Shape("hair", "polygon",
                            ((cx - ident.face_rx * 0.85, y0), (cx + ident.face_rx * 0.25, y0),
                             (cx - ident.face_rx * 0.15, y1), (cx - ident.face_rx * 0.75, y0 + 0.02)),
                            shade))
    elif template == "spiky":
        y0 = _hairline_y(ident)
        spike = 0.025 + 0.055 * hp.extent
        n = 7
        pts = []
        top_y = cy - ident.face_ry - band
        for k in range(n + 1):
            x = cx - ident.face_rx + 2 * ident.face_rx * k / n
            pts.append((x, top_y - (spike if k % 2 == 1 else 0.0)))
        pts += [(cx + ident.face_rx, y0), (cx - ident.face_rx, y0)]
        front.append(_Shape("hair", "polygon", tuple(pts), shade))
    # "buzz" is the bare cap
    return back, front


def _eye_y(_: IdentityParams) -> float:
    return _FACE_CY - 0.035


def nose_geometry(spec: FaceSpec, resolution: int) -> tuple[float, float, float, float]:
    """Nose ellipse (cx, cy, rx, ry) in unit coordinates, after pixel clamps."""
    ident = spec.identity
    nw = _min_px(ident.nose_base * spec.nose.width_scale, resolution)
    nh = _min_px(spec.nose.height / 2.0, resolution)
    return (_FACE_CX, _FACE_CY + 0.045, nw, nh)


def _mouth_shapes(spec: FaceSpec, resolution: int, skin) -> list[_Shape]:
    mp = spec.mouth
    cx = _FACE_CX
    my = _FACE_CY + 0.105
    mw = 0.048
    uth = _min_px(0.010, resolution)
    lth = _min_px(0.013, resolution)
    gap = 0.0 if mp.openness <= 0.0 else _min_px(mp.openness, resolution)
    n = 24
    xs = [cx - mw + 2 * mw * k / n for k in range(n + 1)]

    def center(x):
        t = (x - cx) / mw
        return my + mp.smile * 0.030 * (t * t - 0.5)

    def band(y_off_top, y_off_bot):
        top = [(x, center(x) + y_off_top) for x in xs]
        bot = [(x, center(x) + y_off_bot) for x in reversed(xs)]
        return tuple(top + bot)

    shapes = [
        _Shape("upper_lip", "polygon", band(-gap / 2 - uth, -gap / 2), (0.78, 0.33, 0.35)),
        _Shape("lower_lip", "polygon", band(gap / 2, gap / 2 + lth), (0.72, 0.28, 0.31)),
    ]
    if gap > 0.0:
        shapes.insert(1, _Shape("teeth", "polygon", band(-gap / 2, gap / 2), (0.97, 0.97, 0.94)))
    _ = skin
    return shapes


def _build_shapes(spec: FaceSpec, resolution: int) -> list[_Shape]:
    """Full draw list, back to front."""
    ident = spec.identity
    cx, cy = _FACE_CX, _FACE_CY
    skin = _skin_rgb(ident.skin_tone)
    shapes: list[_Shape] = []

    # neck (body skin) then torso (clothes)
    neck_w = 0.115
    shapes.append(_Shape("body_skin", "polygon",
                         ((cx - neck_w, cy + ident.face_ry * 0.55),
                          (cx + neck_w, cy + ident.face_ry * 0.55),
                          (cx + neck_w, cy + ident.face_ry * 1.45),
                          (cx - neck_w, cy + ident.face_ry * 1.45)),
                         tuple(c * 0.96 for c in skin)))
    sw = min(0.46, 0.22 * spec.body.shoulder + 0.12)
    y_t = cy + ident.face_ry * 1.22
    shapes.append(_Shape("clothes", "polygon",
                         ((cx - neck_w * 1.15, y_t), (cx + neck_w * 1.15, y_t),
                          (cx + sw, y_t + 0.10), (cx + sw, 1.05),
                          (cx - sw, 1.05), (cx - sw, y_t + 0.10)),
                         _CLOTHES_COLORS[spec.body.clothes_color]))

    hair_back, hair_front = _hair_shapes(ident, spec.hair, resolution)
    shapes += hair_back

    shapes.append(_Shape("face_skin", "polygon", _face_outline(ident, spec.face), skin))

    # eyebrows
    ey = _eye_y(ident)
    by = ey - 0.047
    bl = _min_px(0.024, resolution, 1.25)
    th = _min_px(spec.eyebrows.thickness, resolution) / 2.0
    for side in (-1, 1):
        bx = cx + side * ident.eye_spacing
        a = spec.eyebrows.angle * side
        dx, dy = bl * math.cos(a), bl * math.sin(a)
        px, py = -th * math.sin(a), th * math.cos(a)
        shapes.append(_Shape("eyebrows", "polygon",
                             ((bx - dx - px, by - dy - py), (bx + dx - px, by + dy - py),
                              (bx + dx + px, by + dy + py), (bx - dx + px, by - dy + py)),
                             (0.18, 0.12, 0.08)))

    # eyes (label: whole disc; image adds an iris dot)
    er = _min_px(spec.eyes.radius, resolution)
    for side in (-1, 1):
        ex = cx + side * ident.eye_spacing
        shapes.append(_Shape("eyes", "ellipse", (ex, ey, er, er), (0.97, 0.97, 0.98)))
        shapes.append(_Shape(None, "ellipse", (ex, ey, er * 0.45, er * 0.45), (0.15, 0.18, 0.30)))

    ncx, ncy, nrx, nry = nose_geometry(spec, resolution)
    shapes.append(_Shape("nose", "ellipse", (ncx, ncy, nrx, nry),
                         tuple(c * 0.88 for c in skin)))

    shapes += _mouth_shapes(spec, resolution, skin)
    shapes += hair_front
    return shapes


# ---------------------------------------------------------------------------
# rasterization


def _draw(shapes: list[_Shape], size: int, scale: float, label_mode: bool,
          background) -> Image.Image:
    img = Image.new("RGB", (size, size), background if not label_mode else (0, 0, 0))
    dr = ImageDraw.Draw(img)
    if not label_mode:
        # vertical background gradient
        for row in range(size):
            t = row / max(1, size - 1)
            c = tuple(int(round(255 * ((1 - t) * a + t * b)))
                      for a, b in zip(_BG_TOP, _BG_BOTTOM))
            dr.line([(0, row), (size, row)], fill=c)
    colors = dict(PALETTE.class_colors)
    for sh in shapes:
        if label_mode:
            if sh.class_name is None:
                continue
            fill = tuple(colors[sh.class_name])
        else:
            fill = tuple(int(round(255 * min(1.0, max(0.0, c)))) for c in sh.color)
        if sh.kind == "ellipse":
            cx, cy, rx, ry = sh.geom
            dr.ellipse([(cx - rx) * scale, (cy - ry) * scale,
                        (cx + rx) * scale, (cy + ry) * scale], fill=fill)
        else:
            dr.polygon([(x * scale, y * scale) for x, y in sh.geom], fill=fill)
    return img


def render(spec: FaceSpec, resolution: int) -> tuple[np.ndarray, LabelMap]:
    """Render a spec to (image in [0,1], quantized LabelMap)."""
    if resolution not in ALLOWED_RESOLUTIONS:
        raise ValueError(f"resolution must be one of {ALLOWED_RESOLUTIONS}, got {resolution}")
    shapes = _build_shapes(spec, resolution)
    label_img = _draw(shapes, resolution, float(resolution), True, None)
    big = _draw(shapes, resolution * 2, float(resolution * 2), False, None)
    img = big.resize((resolution, resolution), Image.BOX)
    image = np.asarray(img, dtype=np.float32) / 255.0
    label = LabelMap.from_uint8(np.asarray(label_img, dtype=np.uint8))
    return image, label


# ---------------------------------------------------------------------------
# dataset generation


@dataclass
class ManifestEntry:
    id: str
    image: str
    label: str
    identity: int
    split: str
    spec: dict


@dataclass
class DatasetManifest:
    resolution: int
    seed: int
    identity_pool: int
    palette_version: str
    entries: list[ManifestEntry] = field(default_factory=list)

    def to_json(self) -> str:
        return json.dumps({
            "resolution": self.resolution,
            "seed": self.seed,
            "identity_pool": self.identity_pool,
            "palette_version": self.palette_version,
            "entries": [dataclasses.asdict(e) for e in self.entries],
        }, indent=1, sort_keys=True)

    @classmethod
    def from_json(cls, text: str) -> "DatasetManifest":
        d = json.loads(text)
        return cls(resolution=d["resolution"], seed=d["seed"],
                   identity_pool=d["identity_pool"],
                   palette_version=d["palette_version"],
                   entries=[ManifestEntry(**e) for e in d["entries"]])

    def split_entries(self, split: str) -> list[ManifestEntry]:
        return [e for e in self.entries if e.split == split]

    def validate(self, root: Path) -> None:
        for e in self.entries:
            for rel in (e.image, e.label):
                if not (root / rel).exists():
                    raise FileNotFoundError(f"manifest references missing file {rel}")


def load_manifest(path: str | Path) -> DatasetManifest:
    path = Path(path)
    man = DatasetManifest.from_json(path.read_text())
    man.validate(path.parent)
    return man


def _identity_splits(identity_pool: int, seed: int) -> dict[int, str]:
    ids = list(_rng(int(seed), _SPLIT_STREAM).permutation(identity_pool))
    if identity_pool >= 3:
        n_test = max(1, int(round(identity_pool * 0.1)))
        n_val = max(1, int(round(identity_pool * 0.1)))
    elif identity_pool == 2:
        n_test, n_val = 0, 1
    else:
        n_test, n_val = 0, 0
    n_train = identity_pool - n_val - n_test
    out = {}
    for k, ident in enumerate(ids):
        if k < n_train:
            out[int(ident)] = "train"
        elif k < n_train + n_val:
            out[int(ident)] = "val"
        else:
            out[int(ident)] = "test"
    return out


def generate_dataset(n: int, seed: int, identity_pool: int, resolution: int,
                     out_dir: str | Path, progress: bool = False) -> DatasetManifest:
    """Write n image/label PNG pairs plus a manifest.json under out_dir.

    Identities are assigned round-robin so every identity id in the pool is
    used; splits are 80/10/10 over identities, never over images, so no
    identity straddles a split.
    """
    if identity_pool < 1 or n < identity_pool:
        raise ValueError("need n >= identity_pool >= 1")
    out_dir = Path(out_dir)
    (out_dir / "images").mkdir(parents=True, exist_ok=True)
    (out_dir / "labels").mkdir(parents=True, exist_ok=True)

    split_of = _identity_splits(identity_pool, seed)
    man = DatasetManifest(resolution=resolution, seed=int(seed),
                          identity_pool=int(identity_pool),
                          palette_version=PALETTE.version)
    for i in range(n):
        identity_id = i % identity_pool
        item_seed = int(np.random.SeedSequence((int(seed), i)).generate_state(1)[0])
        spec = _spec_for_identity(item_seed, identity_id)
        image, label = render(spec, resolution)
        name = f"{i:06d}.png"
        Image.fromarray((image * 255.0 + 0.5).astype(np.uint8)).save(out_dir / "images" / name)
        Image.fromarray(label.to_uint8()).save(out_dir / "labels" / name)
        man.entries.append(ManifestEntry(
            id=f"{i:06d}", image=f"images/{name}", label=f"labels/{name}",
            identity=identity_id, split=split_of[identity_id], spec=spec.to_dict()))
        if progress and (i + 1) % 200 == 0:
            print(f"  generated {i + 1}/{n}")
    (out_dir / "manifest.json").write_text(man.to_json())
    return man


def load_pair(manifest_path: str | Path, entry: ManifestEntry) -> tuple[np.ndarray, LabelMap]:
    root = Path(manifest_path).parent
    img = np.asarray(Image.open(root / entry.image).convert("RGB"), dtype=np.float32) / 255.0
    lab = LabelMap.from_uint8(np.asarray(Image.open(root / entry.label).convert("RGB")))
    return img, lab
