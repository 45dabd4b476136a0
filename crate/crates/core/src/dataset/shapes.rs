use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{mix_seed, ObjectId};

/// Planar region in millimeters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Shape {
    Rectangle {
        center: [f64; 2],
        half_extents: [f64; 2],
        /// Rotation in radians.
        angle: f64,
    },
    Disc {
        center: [f64; 2],
        radius: f64,
    },
    Annulus {
        center: [f64; 2],
        inner: f64,
        outer: f64,
    },
    Capsule {
        a: [f64; 2],
        b: [f64; 2],
        radius: f64,
    },
}

impl Shape {
    pub fn contains(&self, x: f64, y: f64) -> bool {
        match *self {
            Shape::Rectangle {
                center,
                half_extents,
                angle,
            } => {
                let (s, c) = angle.sin_cos();
                let dx = x - center[0];
                let dy = y - center[1];
                let u = c * dx + s * dy;
                let v = -s * dx + c * dy;
                u.abs() <= half_extents[0] && v.abs() <= half_extents[1]
            }
            Shape::Disc { center, radius } => {
                let dx = x - center[0];
                let dy = y - center[1];
                dx * dx + dy * dy <= radius * radius
            }
            Shape::Annulus {
                center,
                inner,
                outer,
            } => {
                let dx = x - center[0];
                let dy = y - center[1];
                let r2 = dx * dx + dy * dy;
                r2 <= outer * outer && r2 >= inner * inner
            }
            Shape::Capsule { a, b, radius } => {
                let (abx, aby) = (b[0] - a[0], b[1] - a[1]);
                let len2 = abx * abx + aby * aby;
                let t = if len2 > 0.0 {
                    (((x - a[0]) * abx + (y - a[1]) * aby) / len2).clamp(0.0, 1.0)
                } else {
                    0.0
                };
                let dx = x - (a[0] + t * abx);
                let dy = y - (a[1] + t * aby);
                dx * dx + dy * dy <= radius * radius
            }
        }
    }

    /// Axis-aligned bounding box `[min_x, min_y, max_x, max_y]`.
    pub fn bounds(&self) -> [f64; 4] {
        match *self {
            Shape::Rectangle {
                center,
                half_extents,
                angle,
            } => {
                let (s, c) = angle.sin_cos();
                let ex = (c * half_extents[0]).abs() + (s * half_extents[1]).abs();
                let ey = (s * half_extents[0]).abs() + (c * half_extents[1]).abs();
                [center[0] - ex, center[1] - ey, center[0] + ex, center[1] + ey]
            }
            Shape::Disc { center, radius } => [
                center[0] - radius,
                center[1] - radius,
                center[0] + radius,
                center[1] + radius,
            ],
            Shape::Annulus { center, outer, .. } => [
                center[0] - outer,
                center[1] - outer,
                center[0] + outer,
                center[1] + outer,
            ],
            Shape::Capsule { a, b, radius } => [
                a[0].min(b[0]) - radius,
                a[1].min(b[1]) - radius,
                a[0].max(b[0]) + radius,
                a[1].max(b[1]) + radius,
            ],
        }
    }

    fn scaled(&self, k: f64) -> Shape {
        let s2 = |p: [f64; 2]| [p[0] * k, p[1] * k];
        match *self {
            Shape::Rectangle {
                center,
                half_extents,
                angle,
            } => Shape::Rectangle {
                center: s2(center),
                half_extents: s2(half_extents),
                angle,
            },
            Shape::Disc { center, radius } => Shape::Disc {
                center: s2(center),
                radius: radius * k,
            },
            Shape::Annulus {
                center,
                inner,
                outer,
            } => Shape::Annulus {
                center: s2(center),
                inner: inner * k,
                outer: outer * k,
            },
            Shape::Capsule { a, b, radius } => Shape::Capsule {
                a: s2(a),
                b: s2(b),
                radius: radius * k,
            },
        }
    }
}

/// Surface relief applied on top of a primitive's base height.
///
/// Patterns are anchored to the object frame, so two objects sharing a texture
/// present the same local appearance regardless of their outline.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Texture {
    Flat,
    Ridges { period: f64, angle: f64 },
    Studs { pitch: f64, radius: f64 },
    Checker { size: f64 },
    Rings { period: f64 },
}

/// Height of the valleys in a patterned texture, relative to the peaks.
const VALLEY: f64 = 0.3;

impl Texture {
    pub fn factor(&self, x: f64, y: f64) -> f64 {
        match *self {
            Texture::Flat => 1.0,
            Texture::Ridges { period, angle } => {
                let (s, c) = angle.sin_cos();
                let u = (c * x + s * y) / period;
                if u.rem_euclid(1.0) < 0.5 {
                    1.0
                } else {
                    VALLEY
                }
            }
            Texture::Studs { pitch, radius } => {
                let dx = x - (x / pitch).round() * pitch;
                let dy = y - (y / pitch).round() * pitch;
                if dx * dx + dy * dy <= radius * radius {
                    1.0
                } else {
                    VALLEY
                }
            }
            Texture::Checker { size } => {
                let i = (x / size).floor() as i64 + (y / size).floor() as i64;
                if i.rem_euclid(2) == 0 {
                    1.0
                } else {
                    VALLEY
                }
            }
            Texture::Rings { period } => {
                let r = (x * x + y * y).sqrt() / period;
                if r.rem_euclid(1.0) < 0.5 {
                    1.0
                } else {
                    VALLEY
                }
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Primitive {
    pub shape: Shape,
    /// Peak height of the primitive, arbitrary pressure units.
    pub height: f64,
    pub texture: Texture,
}

/// Planar height-field built from a union of textured primitives; where primitives overlap
/// the taller one wins.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SyntheticObject {
    pub object_id: ObjectId,
    pub primitives: Vec<Primitive>,
}

impl SyntheticObject {
    pub fn height(&self, x: f64, y: f64) -> f64 {
        self.primitives
            .iter()
            .filter(|p| p.shape.contains(x, y))
            .map(|p| p.height * p.texture.factor(x, y))
            .fold(0.0, f64::max)
    }

    pub fn in_support(&self, x: f64, y: f64) -> bool {
        self.primitives.iter().any(|p| p.shape.contains(x, y))
    }

    pub fn bounds(&self) -> Option<[f64; 4]> {
        self.primitives
            .iter()
            .map(|p| p.shape.bounds())
            .reduce(|a, b| [a[0].min(b[0]), a[1].min(b[1]), a[2].max(b[2]), a[3].max(b[3])])
    }
}

const FOOTPRINT_KINDS: u32 = 10;

fn footprint(kind: u32, rng: &mut ChaCha8Rng) -> Vec<Shape> {
    let mut u = |lo: f64, hi: f64| rng.random_range(lo..hi);
    match kind {
        // bar
        0 => vec![Shape::Rectangle {
            center: [0.0, 0.0],
            half_extents: [u(40.0, 80.0), u(10.0, 20.0)],
            angle: 0.0,
        }],
        // disc
        1 => vec![Shape::Disc {
            center: [0.0, 0.0],
            radius: u(30.0, 55.0),
        }],
        // ring
        2 => {
            let outer = u(35.0, 55.0);
            vec![Shape::Annulus {
                center: [0.0, 0.0],
                inner: outer * u(0.45, 0.65),
                outer,
            }]
        }
        // handle
        3 => {
            let half = u(40.0, 75.0);
            vec![Shape::Capsule {
                a: [-half, 0.0],
                b: [half, 0.0],
                radius: u(10.0, 18.0),
            }]
        }
        // L-shape
        4 => {
            let (l1, l2, w) = (u(35.0, 60.0), u(25.0, 45.0), u(9.0, 15.0));
            vec![
                Shape::Rectangle {
                    center: [0.0, 0.0],
                    half_extents: [l1, w],
                    angle: 0.0,
                },
                Shape::Rectangle {
                    center: [l1 - w, l2 - w],
                    half_extents: [w, l2],
                    angle: 0.0,
                },
            ]
        }
        // T-shape
        5 => {
            let (l1, l2, w) = (u(35.0, 60.0), u(30.0, 50.0), u(9.0, 15.0));
            vec![
                Shape::Rectangle {
                    center: [0.0, l2],
                    half_extents: [l1, w],
                    angle: 0.0,
                },
                Shape::Rectangle {
                    center: [0.0, 0.0],
                    half_extents: [w, l2],
                    angle: 0.0,
                },
            ]
        }
        // wrench: shaft with a ring at each end
        6 => {
            let half = u(45.0, 75.0);
            let r1 = u(14.0, 22.0);
            let r2 = r1 * u(0.7, 0.95);
            vec![
                Shape::Capsule {
                    a: [-half, 0.0],
                    b: [half, 0.0],
                    radius: u(6.0, 10.0),
                },
                Shape::Annulus {
                    center: [-half, 0.0],
                    inner: r1 * 0.45,
                    outer: r1,
                },
                Shape::Annulus {
                    center: [half, 0.0],
                    inner: r2 * 0.45,
                    outer: r2,
                },
            ]
        }
        // scissors: two finger rings and crossed blades
        7 => {
            let blade = u(50.0, 80.0);
            let ring = u(12.0, 18.0);
            let spread = u(0.2, 0.4);
            vec![
                Shape::Capsule {
                    a: [-ring * 1.5, -ring * 1.2],
                    b: [blade, spread * blade],
                    radius: u(5.0, 8.0),
                },
                Shape::Capsule {
                    a: [-ring * 1.5, ring * 1.2],
                    b: [blade, -spread * blade],
                    radius: u(5.0, 8.0),
                },
                Shape::Annulus {
                    center: [-ring * 2.2, -ring * 1.3],
                    inner: ring * 0.55,
                    outer: ring,
                },
                Shape::Annulus {
                    center: [-ring * 2.2, ring * 1.3],
                    inner: ring * 0.55,
                    outer: ring,
                },
            ]
        }
        // cross
        8 => {
            let (a, b, w) = (u(35.0, 60.0), u(30.0, 55.0), u(8.0, 14.0));
            vec![
                Shape::Rectangle {
                    center: [0.0, 0.0],
                    half_extents: [a, w],
                    angle: 0.0,
                },
                Shape::Rectangle {
                    center: [0.0, 0.0],
                    half_extents: [w, b],
                    angle: 0.0,
                },
            ]
        }
        // hammer: head block and a capsule handle
        _ => {
            let handle = u(50.0, 80.0);
            let head = [u(12.0, 18.0), u(25.0, 40.0)];
            vec![
                Shape::Capsule {
                    a: [0.0, 0.0],
                    b: [handle * 2.0, 0.0],
                    radius: u(7.0, 11.0),
                },
                Shape::Rectangle {
                    center: [0.0, 0.0],
                    half_extents: head,
                    angle: 0.0,
                },
            ]
        }
    }
}

fn random_texture(rng: &mut ChaCha8Rng) -> Texture {
    match rng.random_range(0..5u32) {
        0 => Texture::Flat,
        1 => Texture::Ridges {
            period: rng.random_range(8.0..18.0),
            angle: [0.0, std::f64::consts::FRAC_PI_4, std::f64::consts::FRAC_PI_2]
                [rng.random_range(0..3usize)],
        },
        2 => Texture::Studs {
            pitch: rng.random_range(10.0..16.0),
            radius: rng.random_range(2.5..4.0),
        },
        3 => Texture::Checker {
            size: rng.random_range(7.0..13.0),
        },
        _ => Texture::Rings {
            period: rng.random_range(9.0..16.0),
        },
    }
}

fn different_texture(current: &Texture, rng: &mut ChaCha8Rng) -> Texture {
    loop {
        let t = random_texture(rng);
        if std::mem::discriminant(&t) != std::mem::discriminant(current) {
            return t;
        }
    }
}

fn assemble(id: u32, shapes: Vec<Shape>, texture: &Texture, height: f64) -> SyntheticObject {
    SyntheticObject {
        object_id: ObjectId(id),
        primitives: shapes
            .into_iter()
            .map(|shape| Primitive {
                shape,
                height,
                texture: texture.clone(),
            })
            .collect(),
    }
}

/// Deterministic suite of `count` objects with ids `1..=count`.
///
/// Objects 1 and 2 share an outline but differ in texture; objects 3 and 4 share a
/// texture but differ in extent. The rest are drawn independently.
pub fn generate_object_suite(count: usize, seed: u64) -> Vec<SyntheticObject> {
    let mut objects: Vec<SyntheticObject> = Vec::with_capacity(count);
    for i in 0..count {
        let id = i as u32 + 1;
        let mut rng = ChaCha8Rng::seed_from_u64(mix_seed(seed, id as u64));
        let height = rng.random_range(1.0..3.0);
        let obj = match id {
            2 => {
                let base = &objects[0];
                let shapes = base.primitives.iter().map(|p| p.shape.clone()).collect();
                let texture = different_texture(&base.primitives[0].texture, &mut rng);
                assemble(id, shapes, &texture, height)
            }
            4 => {
                let base = &objects[2];
                let factor = rng.random_range(1.3..1.6);
                let shapes = base.primitives.iter().map(|p| p.shape.scaled(factor)).collect();
                let texture = base.primitives[0].texture.clone();
                assemble(id, shapes, &texture, height)
            }
            _ => {
                let kind = (id - 1) % FOOTPRINT_KINDS;
                let shapes = footprint(kind, &mut rng);
                let texture = random_texture(&mut rng);
                assemble(id, shapes, &texture, height)
            }
        };
        objects.push(obj);
    }
    objects
}
