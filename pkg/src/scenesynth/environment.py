"""Procedural 3D toy world with a pinhole camera and a software rasterizer.

World frame: x right, y up, z forward; the ground plane is y = 0. Objects
are primitives (box, sphere, cylinder) whose `position` is the bottom
center, so anything resting on the ground has position.y == 0. A primitive
of scale s has height 2*s and a circular footprint of radius s (s*sqrt(2)
for the box, measured to its corners).

Rendering is a painter's algorithm over filled projected silhouettes with
flat shading, a per-domain palette, and seeded per-pixel texture noise as
the appearance knob. Everything here is a pure function of its inputs and
an explicit seed.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np

from .scenegraph import BBox, Edge, Node, Predicate, SceneGraph

__all__ = [
    "Camera",
    "DomainConfig",
    "Image",
    "Object3D",
    "PlacementError",
    "Scene3D",
    "derive_seed",
    "ground_truth_graph",
    "project_bbox",
    "rasterize",
    "sample_scene",
    "scene_from_json",
    "scene_to_json",
]

SHAPES = ("box", "sphere", "cylinder")

# color id -> base RGB in [0, 255]
PALETTE = np.array(
    [
        (96, 96, 96),     # 0 gray
        (196, 50, 44),    # 1 red
        (52, 168, 72),    # 2 green
        (54, 92, 200),    # 3 blue
        (222, 196, 44),   # 4 yellow
        (190, 60, 180),   # 5 magenta
        (60, 190, 200),   # 6 cyan
        (140, 96, 50),    # 7 brown
        (232, 150, 170),  # 8 pink
        (235, 235, 235),  # 9 white
        (120, 60, 190),   # 10 purple
        (230, 130, 40),   # 11 orange
        (50, 50, 60),     # 12 charcoal
        (150, 190, 235),  # 13 sky blue
        (180, 180, 170),  # 14 light gray
        (30, 90, 60),     # 15 dark green
    ],
    dtype=np.float64,
)

# material id -> (brightness gain, vertical shading gradient)
MATERIALS = ((1.0, 0.0), (1.18, 0.45), (0.72, 0.15))

MIN_VISIBLE_AREA_PX = 9.0
ON_ELEVATION_TOL = 0.02

_MASK64 = (1 << 64) - 1


def _splitmix64(x: int) -> int:
    x = (x + 0x9E3779B97F4A7C15) & _MASK64
    z = x
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
    return (z ^ (z >> 31)) & _MASK64


def derive_seed(master: int, *indices: int) -> int:
    """Mix a master seed with stream indices into an independent 64-bit seed.

    Uses iterated splitmix64: each index perturbs the state, so
    derive_seed(m, i) and derive_seed(m, j) are decorrelated streams and the
    derivation is reproducible everywhere integers are 64-bit.
    """
    state = master & _MASK64
    for idx in indices:
        state = _splitmix64(state ^ (idx & _MASK64))
    return state


class PlacementError(RuntimeError):
    """Rejection sampling could not place an object within the attempt budget."""


@dataclass(frozen=True)
class Camera:
    """Pinhole camera; pitch_deg > 0 tilts the optical axis down toward the ground."""

    position: tuple[float, float, float] = (0.0, 4.0, -9.0)
    pitch_deg: float = 18.0
    vfov_deg: float = 46.0
    width: int = 64
    height: int = 64

    def __post_init__(self):
        if not (0.0 < self.vfov_deg < 180.0):
            raise ValueError(f"vfov {self.vfov_deg} outside (0, 180)")
        if self.width < 16 or self.height < 16:
            raise ValueError(f"image size {self.width}x{self.height} below 16 px minimum")

    @property
    def focal_px(self) -> float:
        return (self.height / 2.0) / math.tan(math.radians(self.vfov_deg) / 2.0)

    @property
    def principal_point(self) -> tuple[float, float]:
        # pixel centers sit on integer coordinates 0..W-1 / 0..H-1
        return ((self.width - 1) / 2.0, (self.height - 1) / 2.0)

    def _basis(self) -> np.ndarray:
        """Rows are the camera's right/up/forward axes in world coordinates."""
        p = math.radians(self.pitch_deg)
        return np.array(
            [
                [1.0, 0.0, 0.0],
                [0.0, math.cos(p), math.sin(p)],
                [0.0, -math.sin(p), math.cos(p)],
            ]
        )

    def world_to_camera(self, points: np.ndarray) -> np.ndarray:
        """Map world points (..., 3) into camera coordinates (x right, y up, z depth)."""
        return (np.asarray(points, dtype=np.float64) - np.asarray(self.position)) @ self._basis().T

    def camera_to_world_dir(self, dirs: np.ndarray) -> np.ndarray:
        return np.asarray(dirs, dtype=np.float64) @ self._basis()

    def project_camera_points(self, pts_cam: np.ndarray) -> np.ndarray:
        """Perspective-project camera-frame points (..., 3) to pixel (u, v)."""
        pts_cam = np.asarray(pts_cam, dtype=np.float64)
        cx, cy = self.principal_point
        f = self.focal_px
        z = pts_cam[..., 2]
        u = cx + f * pts_cam[..., 0] / z
        v = cy - f * pts_cam[..., 1] / z
        return np.stack([u, v], axis=-1)

    def project_point(self, point_world) -> tuple[float, float, float]:
        """Project one world point; returns (u, v, camera depth)."""
        pc = self.world_to_camera(np.asarray(point_world, dtype=np.float64))
        uv = self.project_camera_points(pc)
        return float(uv[0]), float(uv[1]), float(pc[2])

    def pixel_dir_camera(self, u, v) -> np.ndarray:
        """Unnormalized camera-frame direction through pixel (u, v)."""
        cx, cy = self.principal_point
        f = self.focal_px
        u = np.asarray(u, dtype=np.float64)
        v = np.asarray(v, dtype=np.float64)
        return np.stack([(u - cx) / f, -(v - cy) / f, np.ones_like(u)], axis=-1)

    def pixel_dir_world(self, u, v) -> np.ndarray:
        """Unit world-frame direction through pixel (u, v)."""
        d = self.camera_to_world_dir(self.pixel_dir_camera(u, v))
        return d / np.linalg.norm(d, axis=-1, keepdims=True)


@dataclass(frozen=True)
class Object3D:
    """One primitive: class, shape, bottom-center position, yaw, uniform scale."""

    category: int
    shape: str
    position: tuple[float, float, float]
    yaw_deg: float
    scale: float
    color: int
    material: int

    def __post_init__(self):
        if self.shape not in SHAPES:
            raise ValueError(f"unknown shape {self.shape!r}")
        if self.scale <= 0:
            raise ValueError("scale must be positive")
        if self.position[1] < 0:
            raise ValueError("object base below ground")

    @property
    def center(self) -> np.ndarray:
        x, y, z = self.position
        return np.array([x, y + self.scale, z])

    @property
    def top(self) -> float:
        return self.position[1] + 2.0 * self.scale

    @property
    def footprint_radius(self) -> float:
        return self.scale * math.sqrt(2.0) if self.shape == "box" else self.scale

    def footprint_contains(self, x: float, z: float) -> bool:
        dx = x - self.position[0]
        dz = z - self.position[2]
        if self.shape == "box":
            a = math.radians(self.yaw_deg)
            lx = math.cos(a) * dx + math.sin(a) * dz
            lz = -math.sin(a) * dx + math.cos(a) * dz
            return abs(lx) <= self.scale and abs(lz) <= self.scale
        return math.hypot(dx, dz) <= self.scale


@dataclass
class Scene3D:
    """Objects plus per-scene appearance state and a domain tag."""

    objects: list[Object3D] = field(default_factory=list)
    ground_color: int = 0
    light: float = 1.0
    domain: str = "source"
    flags: list[str] = field(default_factory=list)


@dataclass(frozen=True)
class DomainConfig:
    """Sampling distribution and appearance parameters for one domain."""

    domain: str
    classes: tuple[str, ...]
    class_shapes: tuple[str, ...]
    colors: tuple[int, ...]
    materials: tuple[int, ...]
    count_range: tuple[int, int]
    region: tuple[float, float, float, float]  # xmin, xmax, zmin, zmax
    separation_margin: float
    scales: tuple[float, ...]
    texture_noise: float
    ground_colors: tuple[int, ...]
    sky_colors: tuple[int, ...]
    light_range: tuple[float, float] = (0.8, 1.2)
    camera: Camera = Camera()

    def __post_init__(self):
        if len(self.classes) != len(self.class_shapes):
            raise ValueError("classes and class_shapes must align")
        if self.count_range[0] > self.count_range[1] or self.count_range[0] < 0:
            raise ValueError(f"empty count range {self.count_range}")
        if self.separation_margin < 0:
            raise ValueError("separation margin must be >= 0")
        for s in self.class_shapes:
            if s not in SHAPES:
                raise ValueError(f"unknown shape {s!r}")


def sample_scene(cfg: DomainConfig, seed: int) -> Scene3D:
    """Draw one random scene: uniform class/color/material/size, rejection-sampled placement.

    Placement keeps every pair of footprints at least `separation_margin`
    apart (gap between footprint circles). Raises PlacementError after 1000
    failed attempts for any single object.
    """
    rng = np.random.Generator(np.random.PCG64(seed))
    count = int(rng.integers(cfg.count_range[0], cfg.count_range[1] + 1))
    xmin, xmax, zmin, zmax = cfg.region
    objects: list[Object3D] = []
    for _ in range(count):
        cls = int(rng.integers(len(cfg.classes)))
        scale = float(cfg.scales[int(rng.integers(len(cfg.scales)))])
        color = int(cfg.colors[int(rng.integers(len(cfg.colors)))])
        material = int(cfg.materials[int(rng.integers(len(cfg.materials)))])
        yaw = float(rng.uniform(0.0, 360.0))
        radius = scale * math.sqrt(2.0) if cfg.class_shapes[cls] == "box" else scale
        placed = None
        for _attempt in range(1000):
            x = float(rng.uniform(xmin, xmax))
            z = float(rng.uniform(zmin, zmax))
            ok = True
            for other in objects:
                gap = math.hypot(x - other.position[0], z - other.position[2]) - radius - other.footprint_radius
                if gap < cfg.separation_margin:
                    ok = False
                    break
            if ok:
                placed = (x, z)
                break
        if placed is None:
            raise PlacementError(
                f"could not place object {len(objects)} of {count} with margin "
                f"{cfg.separation_margin} in region {cfg.region} after 1000 attempts"
            )
        objects.append(
            Object3D(
                category=cls,
                shape=cfg.class_shapes[cls],
                position=(placed[0], 0.0, placed[1]),
                yaw_deg=yaw,
                scale=scale,
                color=color,
                material=material,
            )
        )
    ground = int(cfg.ground_colors[int(rng.integers(len(cfg.ground_colors)))])
    light = float(rng.uniform(*cfg.light_range))
    return Scene3D(objects=objects, ground_color=ground, light=light, domain=cfg.domain)


def _box_corners(obj: Object3D) -> np.ndarray:
    s = obj.scale
    a = math.radians(obj.yaw_deg)
    ca, sa = math.cos(a), math.sin(a)
    corners = []
    for dx in (-s, s):
        for dz in (-s, s):
            wx = ca * dx - sa * dz
            wz = sa * dx + ca * dz
            for dy in (0.0, 2.0 * s):
                corners.append((obj.position[0] + wx, obj.position[1] + dy, obj.position[2] + wz))
    return np.array(corners)


_RIM_SAMPLES = 32


def _cylinder_rims(obj: Object3D) -> np.ndarray:
    angles = np.linspace(0.0, 2.0 * math.pi, _RIM_SAMPLES, endpoint=False)
    x = obj.position[0] + obj.scale * np.cos(angles)
    z = obj.position[2] + obj.scale * np.sin(angles)
    bottom = np.stack([x, np.full_like(x, obj.position[1]), z], axis=1)
    top = bottom.copy()
    top[:, 1] = obj.position[1] + 2.0 * obj.scale
    return np.concatenate([bottom, top], axis=0)


def _silhouette_points(obj: Object3D, cam: Camera) -> np.ndarray | None:
    """Projected 2D outline sample points for box/cylinder, or None if behind camera."""
    pts = _box_corners(obj) if obj.shape == "box" else _cylinder_rims(obj)
    pc = cam.world_to_camera(pts)
    front = pc[:, 2] > 1e-6
    if not front.all():
        pc = pc[front]
        if len(pc) < 3:
            return None
    return cam.project_camera_points(pc)


def _sphere_extents(obj: Object3D, cam: Camera) -> tuple[float, float, float, float] | None:
    """Exact (u0, v0, u1, v1) image bounds of a projected sphere via tangent rays."""
    c = cam.world_to_camera(obj.center)
    r = obj.scale
    X, Y, Z = float(c[0]), float(c[1]), float(c[2])
    if Z <= r:
        return None
    f = cam.focal_px
    cx, cy = cam.principal_point

    def tangent_slopes(a: float, b: float) -> tuple[float, float]:
        disc = a * a + b * b - r * r
        root = math.sqrt(max(disc, 0.0))
        denom = b * b - r * r
        return (a * b - r * root) / denom, (a * b + r * root) / denom

    mu0, mu1 = tangent_slopes(X, Z)
    mv0, mv1 = tangent_slopes(Y, Z)
    # image v grows downward, so the upper tangent in camera y is the smaller v
    return (cx + f * mu0, cy - f * mv1, cx + f * mu1, cy - f * mv0)


def project_bbox(cam: Camera, obj: Object3D) -> BBox | None:
    """Tight axis-aligned pixel box of the projected silhouette, clamped to the image.

    Returns None when the object is behind the camera or entirely outside
    the frame.
    """
    if obj.shape == "sphere":
        ext = _sphere_extents(obj, cam)
        if ext is None:
            return None
        u0, v0, u1, v1 = ext
    else:
        uv = _silhouette_points(obj, cam)
        if uv is None:
            return None
        u0, v0 = uv[:, 0].min(), uv[:, 1].min()
        u1, v1 = uv[:, 0].max(), uv[:, 1].max()
    # clamp to the pixel-extent range: pixel centers are integers, so the
    # image area spans [-0.5, size - 0.5]
    u0c, u1c = max(u0, -0.5), min(u1, cam.width - 0.5)
    v0c, v1c = max(v0, -0.5), min(v1, cam.height - 0.5)
    if u1c - u0c <= 1e-9 or v1c - v0c <= 1e-9:
        return None
    return BBox(u=(u0c + u1c) / 2.0, v=(v0c + v1c) / 2.0, w=u1c - u0c, h=v1c - v0c)


def ground_truth_graph(scene: Scene3D, cam: Camera, margin: float = 0.25) -> SceneGraph:
    """Exact scene graph: one node per visible object plus all pairwise predicates.

    Node ids are scene object indices. An object is visible when its
    clamped projected box covers at least 9 px^2. For an ordered visible
    pair (i, j), using camera-frame centers: left/right compare camera x
    with the margin dead zone, front/behind compare camera depth (smaller
    depth is in front), and `on` holds when i's base elevation matches the
    top of j within 0.02 m and i's footprint center lies inside j's
    footprint.
    """
    graph = SceneGraph(width=cam.width, height=cam.height)
    visible: list[int] = []
    for idx, obj in enumerate(scene.objects):
        box = project_bbox(cam, obj)
        if box is not None and box.area() >= MIN_VISIBLE_AREA_PX:
            visible.append(idx)
            graph.nodes.append(Node(id=idx, category=obj.category, bbox=box, score=1.0))
    centers = {i: cam.world_to_camera(scene.objects[i].center) for i in visible}
    for i in visible:
        for j in visible:
            if i == j:
                continue
            oi, oj = scene.objects[i], scene.objects[j]
            ci, cj = centers[i], centers[j]
            if ci[0] < cj[0] - margin:
                graph.edges.append(Edge(i, Predicate.LEFT, j))
            elif ci[0] > cj[0] + margin:
                graph.edges.append(Edge(i, Predicate.RIGHT, j))
            if ci[2] < cj[2] - margin:
                graph.edges.append(Edge(i, Predicate.FRONT, j))
            elif ci[2] > cj[2] + margin:
                graph.edges.append(Edge(i, Predicate.BEHIND, j))
            if abs(oi.position[1] - oj.top) <= ON_ELEVATION_TOL and oj.footprint_contains(
                oi.position[0], oi.position[2]
            ):
                graph.edges.append(Edge(i, Predicate.ON, j))
    return graph


@dataclass
class Image:
    """Row-major RGB image backed by a (height, width, 3) uint8 array."""

    pixels: np.ndarray

    def __post_init__(self):
        self.pixels = np.ascontiguousarray(self.pixels, dtype=np.uint8)
        if self.pixels.ndim != 3 or self.pixels.shape[2] != 3:
            raise ValueError(f"expected (h, w, 3) pixel array, got {self.pixels.shape}")

    @property
    def width(self) -> int:
        return self.pixels.shape[1]

    @property
    def height(self) -> int:
        return self.pixels.shape[0]

    def to_float(self) -> np.ndarray:
        """(3, h, w) float64 in [0, 1], the network input layout."""
        return np.transpose(self.pixels, (2, 0, 1)).astype(np.float64) / 255.0

    def to_ppm_bytes(self) -> bytes:
        header = f"P6\n{self.width} {self.height}\n255\n".encode("ascii")
        return header + self.pixels.tobytes()

    @staticmethod
    def from_ppm_bytes(data: bytes) -> "Image":
        if not data.startswith(b"P6"):
            raise ValueError("not a binary PPM (P6) image")
        fields: list[bytes] = []
        pos = 2
        while len(fields) < 3:
            while pos < len(data) and data[pos : pos + 1].isspace():
                pos += 1
            if data[pos : pos + 1] == b"#":
                while pos < len(data) and data[pos : pos + 1] != b"\n":
                    pos += 1
                continue
            start = pos
            while pos < len(data) and not data[pos : pos + 1].isspace():
                pos += 1
            fields.append(data[start:pos])
        pos += 1  # single whitespace after maxval
        width, height, maxval = (int(f) for f in fields)
        if maxval != 255:
            raise ValueError(f"unsupported PPM maxval {maxval}")
        raw = data[pos : pos + 3 * width * height]
        if len(raw) != 3 * width * height:
            raise ValueError("truncated PPM payload")
        return Image(np.frombuffer(raw, dtype=np.uint8).reshape(height, width, 3).copy())


def _fill_convex_hull(mask_shape: tuple[int, int], points: np.ndarray) -> np.ndarray:
    """Pixel-center mask of the convex hull of 2D points (u, v)."""
    hull = _convex_hull(points)
    h, w = mask_shape
    if len(hull) < 3:
        return np.zeros(mask_shape, dtype=bool)
    uu, vv = np.meshgrid(np.arange(w, dtype=np.float64), np.arange(h, dtype=np.float64))
    mask = np.ones(mask_shape, dtype=bool)
    n = len(hull)
    for k in range(n):
        px, py = hull[k]
        qx, qy = hull[(k + 1) % n]
        mask &= (qx - px) * (vv - py) - (qy - py) * (uu - px) >= -1e-12
    return mask


def _convex_hull(points: np.ndarray) -> list[tuple[float, float]]:
    """Andrew's monotone chain, clockwise in image coordinates (v down)."""
    pts = sorted({(float(p[0]), float(p[1])) for p in points})
    if len(pts) < 3:
        return pts

    def cross(o, a, b):
        return (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])

    lower: list[tuple[float, float]] = []
    for p in pts:
        while len(lower) >= 2 and cross(lower[-2], lower[-1], p) <= 0:
            lower.pop()
        lower.append(p)
    upper: list[tuple[float, float]] = []
    for p in reversed(pts):
        while len(upper) >= 2 and cross(upper[-2], upper[-1], p) <= 0:
            upper.pop()
        upper.append(p)
    return lower[:-1] + upper[:-1]


def _object_mask(obj: Object3D, cam: Camera, ray_dirs: np.ndarray) -> np.ndarray:
    """Boolean pixel mask of the object's silhouette."""
    h, w = ray_dirs.shape[:2]
    if obj.shape == "sphere":
        c = obj.center - np.asarray(cam.position)  # world frame, like ray_dirs
        proj = ray_dirs @ c
        dist_sq = float(c @ c) - proj**2
        return (proj > 0) & (dist_sq <= obj.scale**2)
    uv = _silhouette_points(obj, cam)
    if uv is None:
        return np.zeros((h, w), dtype=bool)
    return _fill_convex_hull((h, w), uv)


def rasterize(scene: Scene3D, cam: Camera, cfg: DomainConfig, seed: int) -> Image:
    """Deterministic painter's-algorithm render of a scene.

    Background: sky above the horizon (color seeded from cfg's sky palette),
    flat ground below. Objects are drawn far to near by camera depth of
    their centers, filled with their shaded palette color, then perturbed
    by seeded per-pixel texture noise of amplitude cfg.texture_noise.
    Ambient brightness scales with the scene light intensity.
    """
    rng = np.random.Generator(np.random.PCG64(seed))
    sky_color = int(cfg.sky_colors[int(rng.integers(len(cfg.sky_colors)))])
    noise = rng.uniform(-cfg.texture_noise, cfg.texture_noise, size=(cam.height, cam.width, 1))

    uu, vv = np.meshgrid(np.arange(cam.width), np.arange(cam.height))
    dirs_cam = cam.pixel_dir_camera(uu, vv)
    dirs_world = cam.camera_to_world_dir(dirs_cam)
    dirs_world /= np.linalg.norm(dirs_world, axis=-1, keepdims=True)

    img = np.empty((cam.height, cam.width, 3), dtype=np.float64)
    ground_pixels = dirs_world[..., 1] < 0.0
    img[:] = PALETTE[sky_color]
    img[ground_pixels] = PALETTE[scene.ground_color]

    order = sorted(
        range(len(scene.objects)),
        key=lambda i: (-float(cam.world_to_camera(scene.objects[i].center)[2]), i),
    )
    covered = np.zeros((cam.height, cam.width), dtype=bool)
    for idx in order:
        obj = scene.objects[idx]
        mask = _object_mask(obj, cam, dirs_world)
        if not mask.any():
            continue
        gain, gradient = MATERIALS[obj.material % len(MATERIALS)]
        color = PALETTE[obj.color] * gain
        if gradient > 0.0:
            rows = np.nonzero(mask.any(axis=1))[0]
            v0, v1 = rows[0], rows[-1]
            span = max(int(v1 - v0), 1)
            vfrac = (vv - v0) / span
            shade = 1.0 + gradient * (0.5 - vfrac)
            img[mask] = color[None, :] * shade[mask][:, None]
        else:
            img[mask] = color
        covered |= mask
    img *= scene.light
    img[covered] += np.broadcast_to(noise, img.shape)[covered]
    return Image(np.clip(np.rint(img), 0, 255).astype(np.uint8))


def scene_to_json(scene: Scene3D) -> dict:
    """JSON-ready dict for a scene, matching the documented on-disk schema."""
    doc = {
        "objects": [
            {
                "class": o.category,
                "shape": o.shape,
                "pos": list(o.position),
                "yaw": o.yaw_deg,
                "scale": o.scale,
                "color": o.color,
                "material": o.material,
            }
            for o in scene.objects
        ],
        "ground": scene.ground_color,
        "light": scene.light,
        "domain": scene.domain,
    }
    if scene.flags:
        doc["flags"] = list(scene.flags)
    return doc


def scene_from_json(doc: dict) -> Scene3D:
    objects = [
        Object3D(
            category=int(o["class"]),
            shape=str(o["shape"]),
            position=tuple(float(x) for x in o["pos"]),
            yaw_deg=float(o["yaw"]),
            scale=float(o["scale"]),
            color=int(o["color"]),
            material=int(o["material"]),
        )
        for o in doc["objects"]
    ]
    return Scene3D(
        objects=objects,
        ground_color=int(doc["ground"]),
        light=float(doc["light"]),
        domain=str(doc["domain"]),
        flags=[str(f) for f in doc.get("flags", [])],
    )


def replace_appearance(scene: Scene3D, cfg: DomainConfig, seed: int) -> Scene3D:
    """Re-draw colors, materials, ground, and light from cfg, keeping geometry."""
    rng = np.random.Generator(np.random.PCG64(seed))
    objects = [
        replace(
            obj,
            color=int(cfg.colors[int(rng.integers(len(cfg.colors)))]),
            material=int(cfg.materials[int(rng.integers(len(cfg.materials)))]),
        )
        for obj in scene.objects
    ]
    return Scene3D(
        objects=objects,
        ground_color=int(cfg.ground_colors[int(rng.integers(len(cfg.ground_colors)))]),
        light=float(rng.uniform(*cfg.light_range)),
        domain=scene.domain,
        flags=list(scene.flags),
    )
