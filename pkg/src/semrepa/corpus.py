"""Procedural labeled video corpus: articulated 2D sprite characters.

Each clip is a single character built from six rotated-rectangle parts (body,
head, two arms, two legs) on an analytic textured background, with

  * exact per-pixel closeness maps (painter's algorithm, hard edges, so the
    stored depth inside a part equals that part's layer depth exactly),
  * a per-frame axis-aligned face box guaranteed to stay inside the frame and
    inside the head part for any head rotation,
  * a face texture derived injectively from the identity code, and
  * eight motion classes with distinct optical-flow signatures.

The head carries the strictly largest closeness so the face is never
occluded; the face texture is painted axis-aligned, which makes per-frame
face crops of one clip identical up to integer re-positioning.
"""

import dataclasses
import json
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import FormatError, InvalidArgumentError
from .seeding import np_rng
from .tensorio import read_tensor, write_tensor

CLASS_NAMES = ("walk", "wave", "turn", "jump", "lean", "crouch", "spin", "still")
NUM_CLASSES = len(CLASS_NAMES)
STILL = CLASS_NAMES.index("still")

# limb order: pseudo-limb "root" (zero area, drives vertical elevation via its
# angle), then the six rendered parts back-to-front-agnostic
LIMB_NAMES = ("root", "body", "head", "arm_l", "arm_r", "leg_l", "leg_r")
PART_NAMES = LIMB_NAMES[1:]

BACKGROUND_CLOSENESS = 0.04
CORPUS_FORMAT_VERSION = 1


@dataclass(frozen=True)
class CorpusConfig:
    frames: int = 17
    height: int = 64
    width: int = 96
    identity_dims: int = 16
    face_px: int = 16
    identity_margin: float = 0.05  # min mean |pixel delta| between distinct-identity faces

    def __post_init__(self):
        if self.identity_dims != 16:
            raise InvalidArgumentError("identity_dims must be 16 (4x4 face block grid)")
        if self.face_px % 4 != 0 or self.face_px < 8:
            raise InvalidArgumentError("face_px must be a multiple of 4 and >= 8")


DEFAULT_CONFIG = CorpusConfig()


@dataclass(frozen=True)
class LimbParam:
    length: float  # px
    width: float  # px
    angles: np.ndarray  # [L] radians


@dataclass(frozen=True)
class SceneSpec:
    identity_code: np.ndarray  # [k], unit norm
    limb_params: tuple  # LimbParam per LIMB_NAMES entry
    face_texture_seed: int
    motion_class: int
    camera_drift: np.ndarray  # [2] px/frame (dx, dy)
    background_seed: int
    layer_depths: np.ndarray  # [6] closeness per PART_NAMES entry, pairwise distinct
    seed: int
    elevation_gain: float
    canvas: tuple  # (H, W) the scene was sized for


@dataclass
class LabeledClip:
    video: np.ndarray  # [1, L, 3, H, W] float32 in [0, 1]
    depth: np.ndarray  # [1, L, 1, H, W] float32 closeness in [0, 1]
    face_boxes: np.ndarray  # [L, 4] int32 (x, y, w, h)
    identity_code: np.ndarray  # [k] float32
    motion_class: int
    reference_frame_index: int = 0
    seed: int = 0


def _figure_dims(face_px: int):
    """Part sizes in px, keyed so the face box stays inside the head at any rotation."""
    head = int(math.ceil(face_px * 1.55))  # > face_px * sqrt(2) even after size jitter
    return {
        "head": (head, head),
        "body": (round(1.05 * face_px) + 4, round(0.85 * face_px) + 2),
        "arm": (round(0.95 * face_px), max(2, round(0.22 * face_px) + 1)),
        "leg": (round(0.92 * face_px), max(3, round(0.3 * face_px) + 1)),
    }


def _motion_trajectories(motion_class: int, L: int, rng: np.random.Generator):
    """Per-limb angle trajectories [L] plus camera drift and elevation gain.

    Every trajectory keeps |delta angle| <= pi/4 per frame.
    """
    t = np.arange(L, dtype=np.float64)
    ramp = t / max(1, L - 1)
    omega = 2.0 * math.pi * 1.25 / max(8, L - 1)  # ~1.25 cycles per clip
    zeros = np.zeros(L)
    ang = {name: zeros.copy() for name in LIMB_NAMES}
    drift = np.zeros(2)
    gain = 0.0
    name = CLASS_NAMES[motion_class]
    if name == "walk":
        a = 0.5 + 0.1 * rng.uniform(-1, 1)
        phase = rng.uniform(0, 2 * math.pi)
        swing = a * np.sin(omega * t + phase)
        ang["leg_l"], ang["leg_r"] = swing, -swing
        ang["arm_l"], ang["arm_r"] = -0.5 * swing, 0.5 * swing
        drift[0] = rng.choice([-1.0, 1.0]) * (0.9 + 0.2 * rng.uniform(-1, 1))
    elif name == "wave":
        a = 0.55 + 0.1 * rng.uniform(-1, 1)
        ang["arm_r"] = -2.1 + a * np.sin(omega * t + rng.uniform(0, 2 * math.pi))
        ang["arm_l"] = 0.15 * np.sin(0.5 * omega * t)
    elif name == "turn":
        phase = rng.uniform(0, 2 * math.pi)
        ang["head"] = (0.55 + 0.1 * rng.uniform(-1, 1)) * np.sin(omega * t + phase)
        ang["body"] = 0.18 * np.sin(omega * t + phase)
    elif name == "jump":
        oj = omega * (1.0 + 0.15 * rng.uniform(-1, 1))
        ang["root"] = (math.pi / 2) * (0.5 - 0.5 * np.cos(oj * t))
        fold = 0.22 * np.sin(ang["root"])
        ang["leg_l"], ang["leg_r"] = fold, -fold
        gain = 3.0 + rng.uniform(0, 1.0)
    elif name == "lean":
        ang["body"] = rng.choice([-1.0, 1.0]) * (0.45 + 0.1 * rng.uniform(-1, 1)) * ramp
        ang["head"] = 0.4 * ang["body"]
    elif name == "crouch":
        r = np.minimum(1.0, 1.4 * ramp)
        ang["root"] = -(math.pi / 2) * r
        ang["leg_l"], ang["leg_r"] = 0.65 * r, -0.65 * r
        ang["body"] = -0.08 * r
        gain = 3.0 + rng.uniform(0, 1.0)
    elif name == "spin":
        rate = rng.choice([-1.0, 1.0]) * (0.55 + 0.08 * rng.uniform(-1, 1))
        ang["body"] = rate * t
    elif name == "still":
        pass
    else:  # pragma: no cover - guarded by caller
        raise InvalidArgumentError(f"unknown motion class {motion_class}")
    return ang, drift, gain


def sample_scene(seed: int, motion_class: int, config: CorpusConfig = DEFAULT_CONFIG) -> SceneSpec:
    """Deterministically sample a scene; identity depends on `seed` only."""
    if not (0 <= motion_class < NUM_CLASSES):
        raise InvalidArgumentError(
            f"motion_class {motion_class} out of range [0, {NUM_CLASSES})"
        )
    rng_id = np_rng(seed, "scene.identity")
    code = rng_id.standard_normal(config.identity_dims)
    code /= np.linalg.norm(code)

    rng = np_rng(seed, f"scene.motion.{motion_class}")
    ang, drift, gain = _motion_trajectories(motion_class, config.frames, rng)

    dims = _figure_dims(config.face_px)
    scale = 1.0 + 0.06 * rng.uniform(-1, 1)  # mild per-scene size jitter
    limbs = []
    for limb in LIMB_NAMES:
        if limb == "root":
            length, width = 0.0, 0.0
        elif limb == "body":
            length, width = dims["body"]
        elif limb == "head":
            length, width = dims["head"]
        elif limb.startswith("arm"):
            length, width = dims["arm"]
        else:
            length, width = dims["leg"]
        limbs.append(LimbParam(length * scale, width * scale, ang[limb].copy()))

    base_depths = np.array([0.55, 0.90, 0.38, 0.46, 0.22, 0.30])
    depths = base_depths + rng.uniform(-0.02, 0.02, size=6)

    spec = SceneSpec(
        identity_code=code.astype(np.float32),
        limb_params=tuple(limbs),
        face_texture_seed=int(np_rng(seed, "scene.face").integers(2**31)),
        motion_class=motion_class,
        camera_drift=drift,
        background_seed=int(np_rng(seed, "scene.background").integers(2**31)),
        layer_depths=depths,
        seed=seed,
        elevation_gain=gain,
        canvas=(config.height, config.width),
    )
    # shrink drift / elevation until the face box fits the sampling canvas
    for _ in range(8):
        if _face_boxes_fit(spec, config.frames, config.height, config.width, config.face_px):
            break
        spec = dataclasses.replace(spec, camera_drift=spec.camera_drift * 0.5,
                                   elevation_gain=spec.elevation_gain * 0.7)
    return spec


def _kinematics(spec: SceneSpec, L: int, H: int, W: int):
    """Per-frame rect placements: list over frames of {part: (cx, cy, angle, len, wid)}."""
    limbs = dict(zip(LIMB_NAMES, spec.limb_params))
    body_len, body_wid = limbs["body"].length, limbs["body"].width
    head_len = limbs["head"].length
    cx0, cy0 = W / 2.0, H / 2.0
    frames = []
    for t in range(L):
        beta = limbs["body"].angles[t]
        elev = -spec.elevation_gain * math.sin(limbs["root"].angles[t])
        cx = cx0 + spec.camera_drift[0] * t
        cy = cy0 + spec.camera_drift[1] * t + elev
        cb, sb = math.cos(beta), math.sin(beta)

        def rot(ox, oy):
            return cx + cb * ox - sb * oy, cy + sb * ox + cb * oy

        placement = {}
        placement["body"] = (cx, cy, beta, body_len, body_wid)
        hx, hy = rot(0.0, -(body_len / 2 + head_len / 2 - 2))
        placement["head"] = (hx, hy, beta + limbs["head"].angles[t], head_len, head_len)
        for side, sgn in (("l", -1.0), ("r", 1.0)):
            px, py = rot(sgn * (body_wid / 2 - 1), -(body_len / 2 - 2))
            a = beta + limbs[f"arm_{side}"].angles[t]
            al, aw = limbs[f"arm_{side}"].length, limbs[f"arm_{side}"].width
            placement[f"arm_{side}"] = (px + math.sin(a) * al / 2, py + math.cos(a) * al / 2, a, al, aw)
            qx, qy = rot(sgn * body_wid / 4, body_len / 2 - 1)
            a = beta + limbs[f"leg_{side}"].angles[t]
            ll, lw = limbs[f"leg_{side}"].length, limbs[f"leg_{side}"].width
            placement[f"leg_{side}"] = (qx + math.sin(a) * ll / 2, qy + math.cos(a) * ll / 2, a, ll, lw)
        frames.append(placement)
    return frames


def _face_box_for(placement, face_px: int):
    hx, hy = placement["head"][0], placement["head"][1]
    return (int(round(hx)) - face_px // 2, int(round(hy)) - face_px // 2, face_px, face_px)


def _face_boxes_fit(spec, L, H, W, face_px, margin=1):
    for placement in _kinematics(spec, L, H, W):
        x, y, w, h = _face_box_for(placement, face_px)
        if x < margin or y < margin or x + w > W - margin or y + h > H - margin:
            return False
    return True


def face_texture(identity_code: np.ndarray, face_texture_seed: int, face_px: int) -> np.ndarray:
    """Identity-coded face patch [face_px, face_px] in [0, 1].

    4x4 grid of blocks: block value 0.5 + sign(c_i) * (0.31 + 0.15 |c_i|/max|c|),
    plus a small seed-keyed 2px checker. The sign pattern dominates the pixel
    mass, keeping cross-identity embedding cosine well below 1; the analog part
    makes the map injective in the code.
    """
    code = np.asarray(identity_code, dtype=np.float64)
    amp = 0.31 + 0.15 * np.abs(code) / max(np.abs(code).max(), 1e-12)
    block = 0.5 + np.sign(code) * amp  # [16]
    grid = block.reshape(4, 4)
    reps = face_px // 4
    tex = np.repeat(np.repeat(grid, reps, axis=0), reps, axis=1)
    rng = np.random.default_rng(face_texture_seed)
    phase = int(rng.integers(2))
    sign = 1.0 if rng.integers(2) else -1.0
    yy, xx = np.mgrid[0:face_px, 0:face_px]
    checker = (((yy // 2 + xx // 2 + phase) % 2) * 2.0 - 1.0) * sign * 0.04
    return np.clip(tex + checker, 0.0, 1.0)


def _background(spec: SceneSpec, L: int, H: int, W: int) -> np.ndarray:
    """Analytic textured background [L, 3, H, W]; camera drift shifts the field."""
    rng = np.random.default_rng(spec.background_seed)
    base = rng.uniform(0.18, 0.32, size=3)
    amps = rng.uniform(0.03, 0.07, size=(3, 2))
    freqs = rng.uniform(0.05, 0.16, size=(2, 2))
    phases = rng.uniform(0, 2 * math.pi, size=(3, 2))
    gdir = rng.uniform(-1, 1, size=2)
    out = np.empty((L, 3, H, W), dtype=np.float64)
    ys, xs = np.mgrid[0:H, 0:W].astype(np.float64)
    for t in range(L):
        # drift moves the figure; the camera pans with it, so the background
        # field is sampled at shifted coordinates
        x = xs + spec.camera_drift[0] * t
        y = ys + spec.camera_drift[1] * t
        grad = 0.05 * (gdir[0] * x / W + gdir[1] * y / H)
        for ch in range(3):
            tex = sum(
                amps[ch, i] * np.sin(2 * math.pi * (freqs[i, 0] * x + freqs[i, 1] * y) + phases[ch, i])
                for i in range(2)
            )
            out[t, ch] = base[ch] + grad + tex
    return np.clip(out, 0.05, 0.55)


def _part_colors(spec: SceneSpec) -> dict:
    rng = np.random.default_rng(spec.background_seed ^ 0x5EED)
    colors = {}
    for name in PART_NAMES:
        colors[name] = rng.uniform(0.5, 0.95, size=3)
    return colors


def _rect_mask(ys, xs, cx, cy, angle, length, width):
    dx, dy = xs - cx, ys - cy
    ca, sa = math.cos(angle), math.sin(angle)
    u = sa * dx + ca * dy  # along the limb (0 = pointing down)
    v = ca * dx - sa * dy
    return (np.abs(u) <= length / 2) & (np.abs(v) <= width / 2)


def render_clip(
    spec: SceneSpec,
    L: int,
    H: int,
    W: int,
    temporal_factor: int = 1,
    spatial_factor: int = 1,
    face_px: int | None = None,
) -> LabeledClip:
    """Painter's-algorithm render of a scene plus exact depth and face boxes."""
    if L < 1:
        raise InvalidArgumentError("L must be >= 1")
    if temporal_factor >= 1 and (L - 1) % temporal_factor != 0:
        raise InvalidArgumentError(f"L={L} must satisfy L == 1 (mod {temporal_factor})")
    if H % spatial_factor or W % spatial_factor:
        raise InvalidArgumentError(f"H={H}, W={W} must be multiples of {spatial_factor}")
    n_traj = len(spec.limb_params[0].angles)
    if L != n_traj:
        raise InvalidArgumentError(f"L={L} does not match the scene trajectory length {n_traj}")
    face_px = face_px if face_px is not None else _default_face_px(spec)

    video = _background(spec, L, H, W)
    depth = np.full((L, 1, H, W), BACKGROUND_CLOSENESS, dtype=np.float64)
    colors = _part_colors(spec)
    tex = face_texture(spec.identity_code, spec.face_texture_seed, face_px)
    placements = _kinematics(spec, L, H, W)
    order = np.argsort(spec.layer_depths)  # far to near
    ys, xs = np.mgrid[0:H, 0:W].astype(np.float64)
    boxes = np.zeros((L, 4), dtype=np.int32)

    for t, placement in enumerate(placements):
        for idx in order:
            name = PART_NAMES[idx]
            cx, cy, a, ln, wd = placement[name]
            if ln <= 0 or wd <= 0:
                continue
            mask = _rect_mask(ys, xs, cx, cy, a, ln, wd)
            for ch in range(3):
                video[t, ch][mask] = colors[name][ch]
            depth[t, 0][mask] = spec.layer_depths[idx]
        x, y, w, h = _face_box_for(placement, face_px)
        if x < 0 or y < 0 or x + w > W or y + h > H:
            raise InvalidArgumentError(
                f"face box {(x, y, w, h)} leaves the {H}x{W} frame at t={t}; "
                "render on a larger canvas or resample the scene"
            )
        boxes[t] = (x, y, w, h)
        video[t, :, y : y + h, x : x + w] = tex[None, :, :]

    return LabeledClip(
        video=video[None].astype(np.float32),
        depth=depth[None].astype(np.float32),
        face_boxes=boxes,
        identity_code=spec.identity_code.astype(np.float32),
        motion_class=spec.motion_class,
        reference_frame_index=0,
        seed=spec.seed,
    )


def _default_face_px(spec: SceneSpec) -> int:
    head_len = dict(zip(LIMB_NAMES, spec.limb_params))["head"].length
    return max(8, 4 * int(head_len / 1.45 / 4))


def generate_clip(seed: int, motion_class: int, config: CorpusConfig = DEFAULT_CONFIG,
                  temporal_factor: int = 1, spatial_factor: int = 1) -> LabeledClip:
    spec = sample_scene(seed, motion_class, config)
    return render_clip(spec, config.frames, config.height, config.width,
                       temporal_factor, spatial_factor, config.face_px)


def generate_corpus(n_clips: int, root_seed: int, config: CorpusConfig = DEFAULT_CONFIG,
                    temporal_factor: int = 1, spatial_factor: int = 1):
    """Yield `n_clips` labeled clips, classes round-robin, clip seeds derived from root."""
    rng = np_rng(root_seed, "corpus.seeds")
    seeds = rng.integers(0, 2**31, size=n_clips)
    for i in range(n_clips):
        yield generate_clip(int(seeds[i]), i % NUM_CLASSES, config, temporal_factor, spatial_factor)


# ---------------------------------------------------------------------------
# on-disk corpus
# ---------------------------------------------------------------------------


def write_corpus(clips, path) -> dict:
    """Write clips to `<path>/clip_%05d/...` plus a manifest; returns the manifest."""
    root = Path(path)
    root.mkdir(parents=True, exist_ok=True)
    entries = []
    for i, clip in enumerate(clips):
        cdir = root / f"clip_{i:05d}"
        cdir.mkdir(exist_ok=True)
        write_tensor(cdir / "video.f32", clip.video.astype(np.float32))
        write_tensor(cdir / "depth.f32", clip.depth.astype(np.float32))
        with open(cdir / "faces.txt", "w") as f:
            for x, y, w, h in clip.face_boxes:
                f.write(f"{x} {y} {w} {h}\n")
        meta = {
            "seed": int(clip.seed),
            "motion_class": int(clip.motion_class),
            "reference_frame_index": int(clip.reference_frame_index),
            "identity_code": [float(v) for v in clip.identity_code],
            "shape": list(clip.video.shape),
        }
        (cdir / "meta").write_text(json.dumps(meta, indent=1))
        entries.append({"seed": meta["seed"], "motion_class": meta["motion_class"],
                        "shape": meta["shape"]})
    manifest = {"format_version": CORPUS_FORMAT_VERSION, "clip_count": len(entries),
                "clips": entries}
    (root / "manifest").write_text(json.dumps(manifest, indent=1))
    return manifest


def read_manifest(path) -> dict:
    root = Path(path)
    mpath = root / "manifest"
    if not mpath.exists():
        raise FormatError("manifest", f"missing at {root}")
    try:
        manifest = json.loads(mpath.read_text())
    except ValueError as e:
        raise FormatError("manifest", f"unparseable: {e}") from e
    if manifest.get("format_version") != CORPUS_FORMAT_VERSION:
        raise FormatError("format_version",
                          f"expected {CORPUS_FORMAT_VERSION}, got {manifest.get('format_version')}")
    if not isinstance(manifest.get("clip_count"), int):
        raise FormatError("clip_count", "missing or not an integer")
    return manifest


def read_corpus(path):
    """Iterate clips from disk; any corrupt file raises before the clip is yielded."""
    root = Path(path)
    manifest = read_manifest(root)
    for i in range(manifest["clip_count"]):
        cdir = root / f"clip_{i:05d}"
        video = read_tensor(cdir / "video.f32")
        depth = read_tensor(cdir / "depth.f32")
        try:
            meta = json.loads((cdir / "meta").read_text())
        except (OSError, ValueError) as e:
            raise FormatError(f"clip_{i:05d}/meta", str(e)) from e
        boxes = []
        for line in (cdir / "faces.txt").read_text().splitlines():
            parts = line.split()
            if len(parts) != 4:
                raise FormatError(f"clip_{i:05d}/faces.txt", f"bad line {line!r}")
            boxes.append([int(v) for v in parts])
        boxes = np.asarray(boxes, dtype=np.int32)
        if boxes.shape[0] != video.shape[1]:
            raise FormatError(f"clip_{i:05d}/faces.txt",
                              f"{boxes.shape[0]} boxes for {video.shape[1]} frames")
        yield LabeledClip(
            video=video,
            depth=depth,
            face_boxes=boxes,
            identity_code=np.asarray(meta["identity_code"], dtype=np.float32),
            motion_class=int(meta["motion_class"]),
            reference_frame_index=int(meta["reference_frame_index"]),
            seed=int(meta["seed"]),
        )


def load_corpus(path) -> list:
    return list(read_corpus(path))
