//! Planar lattice geometry: integer points, quarter-turn rotations and
//! axis-aligned rectangles carrying a local reference frame.
//!
//! Rectangles here are oriented: each one knows which of its sides plays the
//! role of "bottom", and the remaining sides (right, top, left) follow
//! counterclockwise. Crossing directions are always expressed in this local
//! frame: the *hard* direction joins the two short sides (left to right), the
//! *easy* direction joins the two long sides (bottom to top).

use std::fmt;

/// A site of the square lattice.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Debug)]
pub struct Point2 {
    pub x: i32,
    pub y: i32,
}

/// A site of the cubic lattice.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug)]
pub struct Point3 {
    pub x: i32,
    pub y: i32,
    pub z: i32,
}

impl Point2 {
    pub const fn new(x: i32, y: i32) -> Self {
        Point2 { x, y }
    }

    /// The four nearest neighbors, in lexicographic (x, then y) order.
    pub fn neighbors(self) -> [Point2; 4] {
        [
            Point2::new(self.x - 1, self.y),
            Point2::new(self.x, self.y - 1),
            Point2::new(self.x, self.y + 1),
            Point2::new(self.x + 1, self.y),
        ]
    }

    /// The eight surrounding sites (nearest plus diagonal).
    pub fn star_neighbors(self) -> [Point2; 8] {
        [
            Point2::new(self.x - 1, self.y - 1),
            Point2::new(self.x - 1, self.y),
            Point2::new(self.x - 1, self.y + 1),
            Point2::new(self.x, self.y - 1),
            Point2::new(self.x, self.y + 1),
            Point2::new(self.x + 1, self.y - 1),
            Point2::new(self.x + 1, self.y),
            Point2::new(self.x + 1, self.y + 1),
        ]
    }

    pub fn is_adjacent(self, other: Point2) -> bool {
        (self.x - other.x).abs() + (self.y - other.y).abs() == 1
    }

    pub const fn add(self, other: Point2) -> Point2 {
        Point2::new(self.x + other.x, self.y + other.y)
    }

    pub const fn scale(self, k: i32) -> Point2 {
        Point2::new(self.x * k, self.y * k)
    }
}

impl fmt::Display for Point2 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{})", self.x, self.y)
    }
}

/// Counterclockwise quarter turn about the origin applied `n` times:
/// one turn maps (x, y) to (-y, x). Negative `n` rotates clockwise.
pub fn rotate90(p: Point2, n: i32) -> Point2 {
    match n.rem_euclid(4) {
        0 => p,
        1 => Point2::new(-p.y, p.x),
        2 => Point2::new(-p.x, -p.y),
        3 => Point2::new(p.y, -p.x),
        _ => unreachable!(),
    }
}

/// Inclusive axis-aligned bounding box.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub struct Bounds {
    pub min: Point2,
    pub max: Point2,
}

impl Bounds {
    pub fn of(points: impl IntoIterator<Item = Point2>) -> Option<Bounds> {
        let mut it = points.into_iter();
        let first = it.next()?;
        let mut b = Bounds { min: first, max: first };
        for p in it {
            b.min.x = b.min.x.min(p.x);
            b.min.y = b.min.y.min(p.y);
            b.max.x = b.max.x.max(p.x);
            b.max.y = b.max.y.max(p.y);
        }
        Some(b)
    }

    pub fn contains(&self, p: Point2) -> bool {
        (self.min.x..=self.max.x).contains(&p.x) && (self.min.y..=self.max.y).contains(&p.y)
    }

    pub fn pad(&self, margin: i32) -> Bounds {
        Bounds {
            min: Point2::new(self.min.x - margin, self.min.y - margin),
            max: Point2::new(self.max.x + margin, self.max.y + margin),
        }
    }

    pub fn merge(&self, other: &Bounds) -> Bounds {
        Bounds {
            min: Point2::new(self.min.x.min(other.min.x), self.min.y.min(other.min.y)),
            max: Point2::new(self.max.x.max(other.max.x), self.max.y.max(other.max.y)),
        }
    }

    pub fn width(&self) -> i32 {
        self.max.x - self.min.x + 1
    }

    pub fn height(&self) -> i32 {
        self.max.y - self.min.y + 1
    }

    pub fn area(&self) -> usize {
        self.width() as usize * self.height() as usize
    }

    /// Row-major iteration over all sites in the box.
    pub fn sites(&self) -> impl Iterator<Item = Point2> + '_ {
        let b = *self;
        (b.min.y..=b.max.y).flat_map(move |y| (b.min.x..=b.max.x).map(move |x| Point2::new(x, y)))
    }
}

/// The four sides of an oriented rectangle, named in its local frame.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum Side {
    Bottom,
    Right,
    Top,
    Left,
}

/// An axis-aligned lattice rectangle with a local frame.
///
/// Local coordinates are (a, h) with a in [0, long] along the bottom side and
/// h in [0, short] measuring height above it. The global position of a local
/// point is `origin + rotate90((a, h), turns)`, so `turns` counts the
/// counterclockwise quarter turns of the frame relative to the standard one.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub struct Rect {
    pub origin: Point2,
    pub turns: i32,
    pub long: i32,
    pub short: i32,
}

impl Rect {
    pub fn new(origin: Point2, turns: i32, long: i32, short: i32) -> Rect {
        assert!(long >= 1 && short >= 1, "degenerate rectangle");
        Rect { origin, turns, long, short }
    }

    /// An unrotated rectangle [x0, x0+long] x [y0, y0+short].
    pub fn axis_aligned(corner: Point2, long: i32, short: i32) -> Rect {
        Rect::new(corner, 0, long, short)
    }

    pub fn local_to_global(&self, a: i32, h: i32) -> Point2 {
        self.origin.add(rotate90(Point2::new(a, h), self.turns))
    }

    pub fn global_to_local(&self, p: Point2) -> (i32, i32) {
        let d = Point2::new(p.x - self.origin.x, p.y - self.origin.y);
        let q = rotate90(d, -self.turns);
        (q.x, q.y)
    }

    pub fn contains(&self, p: Point2) -> bool {
        let (a, h) = self.global_to_local(p);
        (0..=self.long).contains(&a) && (0..=self.short).contains(&h)
    }

    pub fn bounds(&self) -> Bounds {
        let corners = [
            self.local_to_global(0, 0),
            self.local_to_global(self.long, 0),
            self.local_to_global(0, self.short),
            self.local_to_global(self.long, self.short),
        ];
        Bounds::of(corners).unwrap()
    }

    pub fn on_side(&self, p: Point2, side: Side) -> bool {
        if !self.contains(p) {
            return false;
        }
        let (a, h) = self.global_to_local(p);
        match side {
            Side::Bottom => h == 0,
            Side::Top => h == self.short,
            Side::Left => a == 0,
            Side::Right => a == self.long,
        }
    }

    pub fn side_sites(&self, side: Side) -> Vec<Point2> {
        match side {
            Side::Bottom => (0..=self.long).map(|a| self.local_to_global(a, 0)).collect(),
            Side::Top => (0..=self.long).map(|a| self.local_to_global(a, self.short)).collect(),
            Side::Left => (0..=self.short).map(|h| self.local_to_global(0, h)).collect(),
            Side::Right => (0..=self.short).map(|h| self.local_to_global(self.long, h)).collect(),
        }
    }

    /// All sites of the rectangle in local (h, then a) order.
    pub fn sites(&self) -> impl Iterator<Item = Point2> + '_ {
        let r = *self;
        (0..=r.short).flat_map(move |h| (0..=r.long).map(move |a| r.local_to_global(a, h)))
    }

    pub fn site_count(&self) -> usize {
        (self.long as usize + 1) * (self.short as usize + 1)
    }

    pub fn intersects(&self, other: &Rect) -> bool {
        let a = self.bounds();
        let b = other.bounds();
        a.min.x <= b.max.x && b.min.x <= a.max.x && a.min.y <= b.max.y && b.min.y <= a.max.y
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quarter_turn_matches_definition() {
        assert_eq!(rotate90(Point2::new(1, 0), 1), Point2::new(0, 1));
        assert_eq!(rotate90(Point2::new(1, 0), 4), Point2::new(1, 0));
        assert_eq!(rotate90(Point2::new(3, -2), 2), Point2::new(-3, 2));
    }

    #[test]
    fn four_turns_are_identity_on_a_window() {
        for x in -8..=8 {
            for y in -8..=8 {
                let p = Point2::new(x, y);
                assert_eq!(rotate90(p, 4), p);
                assert_eq!(rotate90(rotate90(p, 3), 1), p);
                assert_eq!(rotate90(p, -1), rotate90(p, 3));
            }
        }
    }

    #[test]
    fn rect_frame_round_trip() {
        for turns in 0..4 {
            let r = Rect::new(Point2::new(5, -3), turns, 8, 2);
            for a in 0..=8 {
                for h in 0..=2 {
                    let g = r.local_to_global(a, h);
                    assert_eq!(r.global_to_local(g), (a, h));
                    assert!(r.contains(g));
                }
            }
            assert_eq!(r.sites().count(), r.site_count());
            assert_eq!(r.bounds().area(), r.site_count());
        }
    }

    #[test]
    fn sides_partition_boundary() {
        let r = Rect::new(Point2::new(0, 0), 1, 4, 2);
        let boundary: std::collections::HashSet<_> = [Side::Bottom, Side::Right, Side::Top, Side::Left]
            .iter()
            .flat_map(|&s| r.side_sites(s))
            .collect();
        let expected: std::collections::HashSet<_> = r
            .sites()
            .filter(|&p| {
                let (a, h) = r.global_to_local(p);
                a == 0 || a == r.long || h == 0 || h == r.short
            })
            .collect();
        assert_eq!(boundary, expected);
    }
}
