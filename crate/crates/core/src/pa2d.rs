//! Piecewise-affine homeomorphisms of the unit square.
//!
//! A map is a list of convex cells covering `[0, 1]²`, each carrying an
//! affine map `x ↦ Lx + t`. Cells may meet along T-junctions; continuity is
//! checked on the full common boundary of every pair of cells.

use std::collections::HashMap;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::certificate::{Certificate, Claim, Subject};
use crate::linearcert::{verify_pingpong, PingPongData};
use crate::num::{Mat2, Rational};
use crate::words::{Acts, GroupElement};

pub type Point = (Rational, Rational);

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PaError {
    #[error("cell {0} is not a nondegenerate convex polygon inside the square")]
    Geometry(usize),
    #[error("cells do not tile the square: {0}")]
    Tiling(String),
    #[error("affine maps of cells {0} and {1} disagree on their common boundary")]
    ContinuityViolation(usize, usize),
    #[error("cell {0} has a linear part with nonpositive determinant")]
    OrientationViolation(usize),
    #[error("cell {0} does not map the boundary of the square into the boundary")]
    BoundaryViolation(usize),
    #[error("image cells do not tile the square: {0}")]
    ImageOverlap(String),
    #[error("point ({0}, {1}) is outside the unit square")]
    Domain(Rational, Rational),
    #[error("map is not affine on a neighbourhood of ({0}, {1})")]
    NotLocallyAffine(Rational, Rational),
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("internal inconsistency: {0}")]
    InternalInconsistency(String),
}

/// `x ↦ linear · x + translate`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Affine {
    pub linear: Mat2,
    pub translate: Point,
}

impl Affine {
    pub fn identity() -> Self {
        Affine { linear: Mat2::identity(), translate: (Rational::zero(), Rational::zero()) }
    }

    /// The map `x ↦ p + α(x − p)`, which fixes `p` with linear part `α`.
    pub fn centred(alpha: &Mat2, p: &Point) -> Self {
        let (ax, ay) = alpha.apply(&p.0, &p.1);
        Affine { linear: alpha.clone(), translate: (&p.0 - ax, &p.1 - ay) }
    }

    pub fn apply(&self, p: &Point) -> Point {
        let (x, y) = self.linear.apply(&p.0, &p.1);
        (x + &self.translate.0, y + &self.translate.1)
    }

    /// `self ∘ inner`.
    pub fn after(&self, inner: &Affine) -> Affine {
        let (tx, ty) = self.apply(&inner.translate);
        Affine { linear: self.linear.mul(&inner.linear), translate: (tx, ty) }
    }

    pub fn inverse(&self) -> Option<Affine> {
        let linear = self.linear.inv().ok()?;
        let (x, y) = linear.apply(&self.translate.0, &self.translate.1);
        Some(Affine { linear, translate: (-x, -y) })
    }

    pub fn is_identity(&self) -> bool {
        self.linear.is_identity() && self.translate.0.is_zero() && self.translate.1.is_zero()
    }

    /// The unique affine map sending the triangle `dom` to `img`, if `dom`
    /// is nondegenerate.
    pub fn from_triangles(dom: [&Point; 3], img: [&Point; 3]) -> Option<Affine> {
        let d = Mat2::new(
            &dom[1].0 - &dom[0].0,
            &dom[2].0 - &dom[0].0,
            &dom[1].1 - &dom[0].1,
            &dom[2].1 - &dom[0].1,
        );
        let e = Mat2::new(
            &img[1].0 - &img[0].0,
            &img[2].0 - &img[0].0,
            &img[1].1 - &img[0].1,
            &img[2].1 - &img[0].1,
        );
        let linear = e.mul(&d.inv().ok()?);
        let (x, y) = linear.apply(&dom[0].0, &dom[0].1);
        Some(Affine { linear, translate: (&img[0].0 - x, &img[0].1 - y) })
    }
}

// ---------------------------------------------------------------------------
// convex polygon geometry

fn cross(o: &Point, a: &Point, b: &Point) -> Rational {
    (&a.0 - &o.0) * (&b.1 - &o.1) - (&a.1 - &o.1) * (&b.0 - &o.0)
}

/// Twice the signed area.
fn area2(poly: &[Point]) -> Rational {
    let n = poly.len();
    (0..n)
        .map(|i| {
            let (a, b) = (&poly[i], &poly[(i + 1) % n]);
            &a.0 * &b.1 - &b.0 * &a.1
        })
        .sum()
}

fn in_closed(poly: &[Point], p: &Point) -> bool {
    let n = poly.len();
    (0..n).all(|i| !cross(&poly[i], &poly[(i + 1) % n], p).is_negative())
}

fn in_open(poly: &[Point], p: &Point) -> bool {
    let n = poly.len();
    (0..n).all(|i| cross(&poly[i], &poly[(i + 1) % n], p).is_positive())
}

/// Drops repeated and collinear vertices and rotates the lexicographically
/// smallest vertex to the front. `None` if nothing with positive area is left.
fn normalize(mut v: Vec<Point>) -> Option<Vec<Point>> {
    loop {
        let n = v.len();
        if n < 3 {
            return None;
        }
        let redundant = (0..n).find(|&i| {
            let (prev, cur, next) = (&v[(i + n - 1) % n], &v[i], &v[(i + 1) % n]);
            cur == next || cross(prev, cur, next).is_zero()
        });
        match redundant {
            Some(i) => {
                v.remove(i);
            }
            None => break,
        }
    }
    let start = (0..v.len()).min_by(|&i, &j| v[i].cmp(&v[j])).expect("nonempty");
    v.rotate_left(start);
    Some(v)
}

/// Every edge has all vertices weakly to its left and every turn is strict.
fn is_convex_ccw(v: &[Point]) -> bool {
    let n = v.len();
    n >= 3
        && (0..n).all(|i| {
            let (a, b) = (&v[i], &v[(i + 1) % n]);
            cross(&v[(i + n - 1) % n], a, b).is_positive() && v.iter().all(|p| !cross(a, b, p).is_negative())
        })
}

/// Sutherland–Hodgman clipping of a convex polygon by a convex clipper.
fn clip(subject: &[Point], clipper: &[Point]) -> Option<Vec<Point>> {
    let mut out = subject.to_vec();
    let m = clipper.len();
    for i in 0..m {
        if out.is_empty() {
            return None;
        }
        let (c0, c1) = (&clipper[i], &clipper[(i + 1) % m]);
        let input = std::mem::take(&mut out);
        let len = input.len();
        let sides: Vec<Rational> = input.iter().map(|p| cross(c0, c1, p)).collect();
        for j in 0..len {
            let k = (j + len - 1) % len;
            let (cur, prev) = (&input[j], &input[k]);
            let (sc, sp) = (&sides[j], &sides[k]);
            let crossing = (sc.is_negative() && sp.is_positive()) || (sp.is_negative() && sc.is_positive());
            if crossing {
                let t = sp / &(sp - sc);
                out.push((&prev.0 + &t * (&cur.0 - &prev.0), &prev.1 + &t * (&cur.1 - &prev.1)));
            }
            if !sc.is_negative() {
                out.push(cur.clone());
            }
        }
    }
    normalize(out)
}

#[derive(Debug, Clone)]
struct BBox {
    lo: Point,
    hi: Point,
}

impl BBox {
    fn of(poly: &[Point]) -> BBox {
        let mut lo = poly[0].clone();
        let mut hi = poly[0].clone();
        for p in &poly[1..] {
            if p.0 < lo.0 {
                lo.0 = p.0.clone();
            }
            if p.1 < lo.1 {
                lo.1 = p.1.clone();
            }
            if p.0 > hi.0 {
                hi.0 = p.0.clone();
            }
            if p.1 > hi.1 {
                hi.1 = p.1.clone();
            }
        }
        BBox { lo, hi }
    }

    fn touches(&self, other: &BBox) -> bool {
        self.lo.0 <= other.hi.0 && other.lo.0 <= self.hi.0 && self.lo.1 <= other.hi.1 && other.lo.1 <= self.hi.1
    }

    /// Overlap with positive area.
    fn overlaps(&self, other: &BBox) -> bool {
        self.lo.0 < other.hi.0 && other.lo.0 < self.hi.0 && self.lo.1 < other.hi.1 && other.lo.1 < self.hi.1
    }
}

fn in_unit_square(p: &Point) -> bool {
    let z = Rational::zero();
    let one = Rational::one();
    p.0 >= z && p.0 <= one && p.1 >= z && p.1 <= one
}

/// Which sides of the square a point lies on: bits for x=0, x=1, y=0, y=1.
fn sides_of(p: &Point) -> u8 {
    let mut s = 0;
    if p.0.is_zero() {
        s |= 1;
    }
    if p.0.is_one() {
        s |= 2;
    }
    if p.1.is_zero() {
        s |= 4;
    }
    if p.1.is_one() {
        s |= 8;
    }
    s
}

// ---------------------------------------------------------------------------
// maps

#[derive(Debug, Clone, Serialize, Deserialize)]
struct CellRepr {
    vertices: Vec<Point>,
    linear: Mat2,
    translate: Point,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct PaRepr {
    cells: Vec<CellRepr>,
}

#[derive(Debug, Clone)]
pub struct Cell {
    vertices: Vec<Point>,
    map: Affine,
}

impl Cell {
    pub fn vertices(&self) -> &[Point] {
        &self.vertices
    }

    pub fn map(&self) -> &Affine {
        &self.map
    }

    fn image(&self) -> Vec<Point> {
        self.vertices.iter().map(|p| self.map.apply(p)).collect()
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(try_from = "PaRepr", into = "PaRepr")]
pub struct PaMap {
    cells: Vec<Cell>,
}

impl TryFrom<PaRepr> for PaMap {
    type Error = PaError;

    fn try_from(r: PaRepr) -> Result<Self, PaError> {
        PaMap::new(
            r.cells
                .into_iter()
                .map(|c| (c.vertices, Affine { linear: c.linear, translate: c.translate }))
                .collect(),
        )
    }
}

impl From<PaMap> for PaRepr {
    fn from(m: PaMap) -> Self {
        PaRepr {
            cells: m
                .cells
                .into_iter()
                .map(|c| CellRepr { vertices: c.vertices, linear: c.map.linear, translate: c.map.translate })
                .collect(),
        }
    }
}

fn unit_square() -> Vec<Point> {
    let (z, o) = (Rational::zero(), Rational::one());
    vec![(z.clone(), z.clone()), (o.clone(), z.clone()), (o.clone(), o), (z, Rational::one())]
}

fn rect(x0: &Rational, y0: &Rational, x1: &Rational, y1: &Rational) -> Vec<Point> {
    vec![
        (x0.clone(), y0.clone()),
        (x1.clone(), y0.clone()),
        (x1.clone(), y1.clone()),
        (x0.clone(), y1.clone()),
    ]
}

fn edges(poly: &[Point]) -> impl Iterator<Item = (&Point, &Point)> {
    let n = poly.len();
    (0..n).map(move |i| (&poly[i], &poly[(i + 1) % n]))
}

/// Union of two convex polygons sharing the edge `a → b` of `p` (and
/// `b → a` of `q`), if the union is convex.
fn try_merge(p: &[Point], q: &[Point], a: &Point, b: &Point) -> Option<Vec<Point>> {
    let ip = p.iter().position(|v| v == b)?;
    let iq = q.iter().position(|v| v == a)?;
    let mut out: Vec<Point> = p[ip..].iter().chain(&p[..ip]).cloned().collect();
    let rq: Vec<&Point> = q[iq..].iter().chain(&q[..iq]).collect();
    out.extend(rq[1..rq.len() - 1].iter().map(|v| (*v).clone()));
    let out = normalize(out)?;
    is_convex_ccw(&out).then_some(out)
}

/// Repeatedly merges pairs of polygons across exactly shared edges.
fn merge_group(mut polys: Vec<Vec<Point>>) -> Vec<Vec<Point>> {
    loop {
        let mut owner: HashMap<(&Point, &Point), usize> = HashMap::new();
        for (i, p) in polys.iter().enumerate() {
            for e in edges(p) {
                owner.insert(e, i);
            }
        }
        let mut used = vec![false; polys.len()];
        let mut merges = Vec::new();
        for (i, p) in polys.iter().enumerate() {
            if used[i] {
                continue;
            }
            for (a, b) in edges(p) {
                let Some(&j) = owner.get(&(b, a)) else { continue };
                if j == i || used[j] {
                    continue;
                }
                if let Some(u) = try_merge(p, &polys[j], a, b) {
                    used[i] = true;
                    used[j] = true;
                    merges.push((i, j, u));
                    break;
                }
            }
        }
        if merges.is_empty() {
            return polys;
        }
        let mut next: Vec<Vec<Point>> = Vec::with_capacity(polys.len());
        for (_, _, u) in merges {
            next.push(u);
        }
        for (i, p) in polys.into_iter().enumerate() {
            if !used[i] {
                next.push(p);
            }
        }
        polys = next;
    }
}

/// Merges same-map neighbours and sorts cells by vertex list.
fn canonicalize(cells: Vec<Cell>) -> Vec<Cell> {
    let mut groups: HashMap<Affine, Vec<Vec<Point>>> = HashMap::new();
    let mut order: Vec<Affine> = Vec::new();
    for c in cells {
        let entry = groups.entry(c.map.clone()).or_default();
        if entry.is_empty() {
            order.push(c.map);
        }
        entry.push(c.vertices);
    }
    let mut out: Vec<Cell> = Vec::new();
    for map in order {
        let polys = groups.remove(&map).expect("group present");
        out.extend(merge_group(polys).into_iter().map(|vertices| Cell { vertices, map: map.clone() }));
    }
    out.sort_by(|a, b| a.vertices.cmp(&b.vertices));
    out
}

impl PaMap {
    /// Builds and validates a map from `(vertices, affine map)` cells.
    pub fn new(cells: Vec<(Vec<Point>, Affine)>) -> Result<PaMap, PaError> {
        let mut out = Vec::with_capacity(cells.len());
        for (i, (vertices, map)) in cells.into_iter().enumerate() {
            let vertices = normalize(vertices).ok_or(PaError::Geometry(i))?;
            if !is_convex_ccw(&vertices) || !vertices.iter().all(in_unit_square) {
                return Err(PaError::Geometry(i));
            }
            if !map.linear.det().is_positive() {
                return Err(PaError::OrientationViolation(i));
            }
            out.push(Cell { vertices, map });
        }
        validate(&out)?;
        Ok(PaMap { cells: canonicalize(out) })
    }

    pub fn identity() -> PaMap {
        PaMap { cells: vec![Cell { vertices: unit_square(), map: Affine::identity() }] }
    }

    /// The map that is `map` on all of the square. Only valid when `map`
    /// preserves the square, which is checked.
    pub fn affine(map: Affine) -> Result<PaMap, PaError> {
        PaMap::new(vec![(unit_square(), map)])
    }

    pub fn cells(&self) -> &[Cell] {
        &self.cells
    }

    pub fn cell_count(&self) -> usize {
        self.cells.len()
    }

    pub fn is_identity(&self) -> bool {
        self.cells.iter().all(|c| c.map.is_identity())
    }

    /// Twice the total area of the cells; 2 for every valid map.
    pub fn total_area2(&self) -> Rational {
        self.cells.iter().map(|c| area2(&c.vertices)).sum()
    }

    pub fn eval(&self, p: &Point) -> Result<Point, PaError> {
        if !in_unit_square(p) {
            return Err(PaError::Domain(p.0.clone(), p.1.clone()));
        }
        let cell = self
            .cells
            .iter()
            .find(|c| in_closed(&c.vertices, p))
            .ok_or_else(|| PaError::InternalInconsistency("cells do not cover the square".into()))?;
        Ok(cell.map.apply(p))
    }

    pub fn inverse(&self) -> PaMap {
        let cells = self
            .cells
            .iter()
            .map(|c| Cell {
                vertices: normalize(c.image()).expect("images of cells are nondegenerate"),
                map: c.map.inverse().expect("determinants are positive"),
            })
            .collect();
        PaMap { cells: canonicalize(cells) }
    }

    /// `self ∘ inner`, by clipping the image of each cell of `inner` against
    /// the cells of `self` and pulling the pieces back.
    pub fn compose(&self, inner: &PaMap) -> PaMap {
        let boxes: Vec<BBox> = self.cells.iter().map(|c| BBox::of(&c.vertices)).collect();
        let mut pieces = Vec::new();
        for c in &inner.cells {
            let image = c.image();
            let ib = BBox::of(&image);
            let back = c.map.inverse().expect("determinants are positive");
            for (d, db) in self.cells.iter().zip(&boxes) {
                if !ib.overlaps(db) {
                    continue;
                }
                if let Some(piece) = clip(&image, &d.vertices) {
                    let vertices = normalize(piece.iter().map(|p| back.apply(p)).collect())
                        .expect("pullback of a nondegenerate piece");
                    pieces.push(Cell { vertices, map: d.map.after(&c.map) });
                }
            }
        }
        PaMap { cells: canonicalize(pieces) }
    }

    pub fn commutator(&self, other: &PaMap) -> PaMap {
        self.compose(other).compose(&self.inverse()).compose(&other.inverse())
    }

    /// Runs the full validation again, for maps built by composition.
    pub fn revalidate(&self) -> Result<(), PaError> {
        validate(&self.cells)
    }

    pub fn max_bits(&self) -> u64 {
        self.cells
            .iter()
            .flat_map(|c| c.vertices.iter().flat_map(|p| [p.0.bits(), p.1.bits()]))
            .max()
            .unwrap_or(0)
    }
}

impl PartialEq for PaMap {
    /// Semantic equality: two maps are equal when they agree as functions.
    fn eq(&self, other: &PaMap) -> bool {
        self.compose(&other.inverse()).is_identity()
    }
}

impl Eq for PaMap {}

impl fmt::Display for PaMap {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", serde_json::to_string(self).expect("maps serialize"))
    }
}

fn validate(cells: &[Cell]) -> Result<(), PaError> {
    let boxes: Vec<BBox> = cells.iter().map(|c| BBox::of(&c.vertices)).collect();
    let total: Rational = cells.iter().map(|c| area2(&c.vertices)).sum();
    if total != Rational::from(2) {
        return Err(PaError::Tiling(format!("cell areas sum to {}", total.half())));
    }
    for i in 0..cells.len() {
        for j in i + 1..cells.len() {
            if !boxes[i].touches(&boxes[j]) {
                continue;
            }
            let (p, q) = (&cells[i], &cells[j]);
            if boxes[i].overlaps(&boxes[j]) && clip(&p.vertices, &q.vertices).is_some() {
                return Err(PaError::Tiling(format!("cells {i} and {j} overlap")));
            }
            let shared = p
                .vertices
                .iter()
                .filter(|v| in_closed(&q.vertices, v))
                .chain(q.vertices.iter().filter(|v| in_closed(&p.vertices, v)));
            for v in shared {
                if p.map.apply(v) != q.map.apply(v) {
                    return Err(PaError::ContinuityViolation(i, j));
                }
            }
        }
    }
    let images: Vec<Vec<Point>> = cells.iter().map(Cell::image).collect();
    for (i, (c, img)) in cells.iter().zip(&images).enumerate() {
        if !img.iter().all(in_unit_square) {
            return Err(PaError::ImageOverlap(format!("image of cell {i} leaves the square")));
        }
        let n = c.vertices.len();
        for k in 0..n {
            let on_side = sides_of(&c.vertices[k]) & sides_of(&c.vertices[(k + 1) % n]);
            if on_side != 0 && sides_of(&img[k]) & sides_of(&img[(k + 1) % n]) == 0 {
                return Err(PaError::BoundaryViolation(i));
            }
        }
    }
    let image_total: Rational = images.iter().map(|p| area2(p)).sum();
    if image_total != Rational::from(2) {
        return Err(PaError::ImageOverlap(format!("image areas sum to {}", image_total.half())));
    }
    let image_boxes: Vec<BBox> = images.iter().map(|p| BBox::of(p)).collect();
    for i in 0..images.len() {
        for j in i + 1..images.len() {
            if image_boxes[i].overlaps(&image_boxes[j]) && clip(&images[i], &images[j]).is_some() {
                return Err(PaError::ImageOverlap(format!("images of cells {i} and {j} overlap")));
            }
        }
    }
    Ok(())
}

impl GroupElement for PaMap {
    fn identity_like(&self) -> Self {
        PaMap::identity()
    }

    fn compose(&self, rhs: &Self) -> Self {
        PaMap::compose(self, rhs)
    }

    fn inverse(&self) -> Self {
        PaMap::inverse(self)
    }

    fn is_identity(&self) -> bool {
        PaMap::is_identity(self)
    }

    fn group_eq(&self, other: &Self) -> bool {
        self == other
    }
}

impl Acts<Point> for PaMap {
    fn act(&self, p: &Point) -> Point {
        self.eval(p).expect("point in the square")
    }
}

/// The linear part of `f` at `p`, provided every cell containing `p` carries
/// the same affine map.
pub fn linear_part_at(f: &PaMap, p: &Point) -> Result<Mat2, PaError> {
    if !in_unit_square(p) {
        return Err(PaError::Domain(p.0.clone(), p.1.clone()));
    }
    let mut incident = f.cells.iter().filter(|c| in_closed(&c.vertices, p));
    let first = incident
        .next()
        .ok_or_else(|| PaError::InternalInconsistency("cells do not cover the square".into()))?;
    if incident.all(|c| c.map == first.map) {
        Ok(first.map.linear.clone())
    } else {
        Err(PaError::NotLocallyAffine(p.0.clone(), p.1.clone()))
    }
}

fn square_around(p: &Point, r: &Rational) -> Vec<Point> {
    rect(&(&p.0 - r), &(&p.1 - r), &(&p.0 + r), &(&p.1 + r))
}

/// Triangulates the annulus between `outer` and `inner`, with `inner`
/// moving to `moved`. Each side uses one of its two diagonals, whichever
/// keeps both image triangles positively oriented.
fn annulus_cells(outer: &[Point], inner: &[Point], moved: &[Point]) -> Option<Vec<(Vec<Point>, Affine)>> {
    let mut cells = Vec::with_capacity(8);
    for k in 0..4 {
        let (o0, o1) = (&outer[k], &outer[(k + 1) % 4]);
        let (i0, i1) = (&inner[k], &inner[(k + 1) % 4]);
        let (j0, j1) = (&moved[k], &moved[(k + 1) % 4]);
        let options = [
            [([o0, o1, i1], [o0, o1, j1]), ([o0, i1, i0], [o0, j1, j0])],
            [([o0, o1, i0], [o0, o1, j0]), ([o1, i1, i0], [o1, j1, j0])],
        ];
        let good = options.into_iter().find(|tris| {
            tris.iter().all(|(d, m)| cross(d[0], d[1], d[2]).is_positive() && cross(m[0], m[1], m[2]).is_positive())
        })?;
        for (d, m) in good {
            cells.push((d.iter().map(|p| (*p).clone()).collect(), Affine::from_triangles(d, m)?));
        }
    }
    Some(cells)
}

/// A map equal to `x ↦ p + α(x − p)` near `p` and the identity outside the
/// square `p + r_out·[−1, 1]²`.
pub fn prescribed_derivative_homeo(alpha: &Mat2, p: &Point, r_out: &Rational) -> Result<PaMap, PaError> {
    if !alpha.det().is_positive() {
        return Err(PaError::Precondition("det α must be positive".into()));
    }
    if !r_out.is_positive() {
        return Err(PaError::Precondition("r_out must be positive".into()));
    }
    let (z, one) = (Rational::zero(), Rational::one());
    let inside = |c: &Rational| (c - r_out) > z && (c + r_out) < one;
    if !inside(&p.0) || !inside(&p.1) {
        return Err(PaError::Precondition("outer square must lie in the interior of the unit square".into()));
    }
    let centred = Affine::centred(alpha, p);
    let outer = square_around(p, r_out);
    let (lo_x, lo_y, hi_x, hi_y) = (&p.0 - r_out, &p.1 - r_out, &p.0 + r_out, &p.1 + r_out);
    let frame = vec![
        (rect(&z, &z, &one, &lo_y), Affine::identity()),
        (rect(&z, &hi_y, &one, &one), Affine::identity()),
        (rect(&z, &lo_y, &lo_x, &hi_y), Affine::identity()),
        (rect(&hi_x, &lo_y, &one, &hi_y), Affine::identity()),
    ];
    let mut r_in = r_out.half();
    for _ in 0..128 {
        let inner = square_around(p, &r_in);
        let moved: Vec<Point> = inner.iter().map(|v| centred.apply(v)).collect();
        if moved.iter().all(|v| in_open(&outer, v)) {
            if let Some(annulus) = annulus_cells(&outer, &inner, &moved) {
                let mut cells = frame.clone();
                cells.extend(annulus);
                cells.push((inner, centred.clone()));
                if let Ok(m) = PaMap::new(cells) {
                    return Ok(m);
                }
            }
        }
        r_in = r_in.half();
    }
    Err(PaError::InternalInconsistency("no inner radius produced a valid annulus".into()))
}

/// Checks a freeness claim for `(f, g)`: both fix `point`, both are affine
/// near it, and their linear parts play ping-pong on the given arcs. The
/// derivative at a common fixed point is a homomorphism, so a free image
/// forces a free source.
pub fn verify_pa_free(f: &PaMap, g: &PaMap, point: &Point, arcs: &PingPongData) -> Result<Vec<String>, String> {
    let mut log = Vec::new();
    for (name, m) in [("f", f), ("g", g)] {
        let image = m.eval(point).map_err(|e| e.to_string())?;
        if &image != point {
            return Err(format!("{name} does not fix ({}, {})", point.0, point.1));
        }
        log.push(format!("{name} fixes ({}, {})", point.0, point.1));
    }
    let alpha = linear_part_at(f, point).map_err(|e| e.to_string())?;
    let beta = linear_part_at(g, point).map_err(|e| e.to_string())?;
    log.push(format!("Df(p) = {alpha:?}, Dg(p) = {beta:?}"));
    log.extend(verify_pingpong(&alpha, &beta, arcs)?);
    log.push("derivatives at p generate a free group, hence so do f and g".into());
    Ok(log)
}

/// Builds the freeness certificate for `(f, g)` at `point` with the
/// standard arcs.
pub fn pa_free_certificate(f: &PaMap, g: &PaMap, point: &Point) -> Result<Certificate, String> {
    Certificate::issue(
        Subject::PaPair { f: f.clone(), g: g.clone(), point: point.clone() },
        Claim::Free { arcs: PingPongData::sanov() },
    )
    .map_err(|e| e.to_string())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::num::q;
    use crate::words::{Generators, Word};

    fn pt(a: i64, b: i64, c: i64, d: i64) -> Point {
        (q(a, b), q(c, d))
    }

    fn centre() -> Point {
        pt(1, 2, 1, 2)
    }

    fn triangles(upper: Affine) -> Vec<(Vec<Point>, Affine)> {
        vec![
            (vec![pt(0, 1, 0, 1), pt(1, 1, 0, 1), pt(1, 1, 1, 1)], Affine::identity()),
            (vec![pt(0, 1, 0, 1), pt(1, 1, 1, 1), pt(0, 1, 1, 1)], upper),
        ]
    }

    #[test]
    fn single_identity_cell() {
        let m = PaMap::new(vec![(unit_square(), Affine::identity())]).unwrap();
        assert!(m.is_identity());
        assert_eq!(m.eval(&pt(1, 3, 2, 7)).unwrap(), pt(1, 3, 2, 7));
    }

    #[test]
    fn mismatched_triangles_break_continuity() {
        let shift = Affine { linear: Mat2::identity(), translate: (q(0, 1), q(1, 10)) };
        assert!(matches!(PaMap::new(triangles(shift)), Err(PaError::ContinuityViolation(_, _))));
    }

    #[test]
    fn reflection_is_rejected() {
        let flip = Affine { linear: Mat2::from_ints(-1, 0, 0, 1), translate: (q(1, 1), q(0, 1)) };
        assert_eq!(PaMap::affine(flip).unwrap_err(), PaError::OrientationViolation(0));
    }

    #[test]
    fn overlapping_images_are_rejected() {
        // fold the upper triangle onto the lower one while agreeing on the diagonal
        let fold = Affine::from_triangles(
            [&pt(0, 1, 0, 1), &pt(1, 1, 1, 1), &pt(0, 1, 1, 1)],
            [&pt(0, 1, 0, 1), &pt(1, 1, 1, 1), &pt(1, 2, 1, 4)],
        )
        .unwrap();
        assert!(PaMap::new(triangles(fold)).is_err());
    }

    #[test]
    fn identity_derivative_gives_identity() {
        let m = prescribed_derivative_homeo(&Mat2::identity(), &centre(), &q(1, 4)).unwrap();
        assert!(m.is_identity());
    }

    #[test]
    fn shear_derivative_contract() {
        let alpha = Mat2::from_ints(1, 2, 0, 1);
        let f = prescribed_derivative_homeo(&alpha, &centre(), &q(1, 4)).unwrap();
        assert_eq!(linear_part_at(&f, &centre()).unwrap(), alpha);
        for p in [pt(1, 8, 1, 2), pt(1, 2, 1, 5), pt(4, 5, 9, 10), pt(1, 4, 1, 4), pt(3, 4, 1, 2)] {
            assert_eq!(f.eval(&p).unwrap(), p);
        }
        assert_eq!(f.eval(&centre()).unwrap(), centre());
        assert!(f.revalidate().is_ok());
        // the outer square corner is a crease between the frame and the annulus
        assert!(matches!(linear_part_at(&f, &pt(1, 4, 1, 4)), Err(PaError::NotLocallyAffine(_, _))));
    }

    #[test]
    fn inner_vertex_is_a_crease() {
        let alpha = Mat2::from_ints(1, 2, 0, 1);
        let f = prescribed_derivative_homeo(&alpha, &centre(), &q(1, 4)).unwrap();
        let inner = f.cells().iter().find(|c| c.map().linear == alpha).unwrap();
        let corner = inner.vertices()[0].clone();
        assert!(matches!(linear_part_at(&f, &corner), Err(PaError::NotLocallyAffine(_, _))));
    }

    #[test]
    fn diagonal_derivative_preserves_area() {
        let alpha = Mat2::new(q(2, 1), q(0, 1), q(0, 1), q(1, 2));
        let f = prescribed_derivative_homeo(&alpha, &centre(), &q(1, 4)).unwrap();
        let inner = f.cells().iter().find(|c| c.map().linear == alpha).unwrap();
        assert_eq!(area2(&inner.image()), area2(inner.vertices()));
        assert_eq!(linear_part_at(&f, &centre()).unwrap(), alpha);
    }

    #[test]
    fn shears_compose_on_overlap() {
        let p = centre();
        let f = prescribed_derivative_homeo(&Mat2::from_ints(1, 1, 0, 1), &p, &q(1, 4)).unwrap();
        let g = prescribed_derivative_homeo(&Mat2::from_ints(1, 0, 1, 1), &p, &q(1, 4)).unwrap();
        let fg = f.compose(&g);
        assert_eq!(linear_part_at(&fg, &p).unwrap(), Mat2::from_ints(2, 1, 1, 1));
        assert!(fg.revalidate().is_ok());
        assert_eq!(fg.total_area2(), q(2, 1));
        assert!(f.compose(&f.inverse()).is_identity());
        for x in [pt(1, 3, 2, 5), pt(5, 8, 3, 7), pt(1, 2, 9, 16)] {
            assert_eq!(fg.eval(&x).unwrap(), f.eval(&g.eval(&x).unwrap()).unwrap());
        }
    }

    #[test]
    fn json_shape() {
        let j = serde_json::to_string(&PaMap::identity()).unwrap();
        assert_eq!(
            j,
            r#"{"cells":[{"vertices":[["0","0"],["1","0"],["1","1"],["0","1"]],"linear":[["1","0"],["0","1"]],"translate":["0","0"]}]}"#
        );
        let back: PaMap = serde_json::from_str(&j).unwrap();
        assert!(back.is_identity());
    }

    #[test]
    fn sanov_pair_certifies_free() {
        let p = centre();
        let f = prescribed_derivative_homeo(&Mat2::from_ints(1, 2, 0, 1), &p, &q(1, 4)).unwrap();
        let g = prescribed_derivative_homeo(&Mat2::from_ints(1, 0, 2, 1), &p, &q(1, 4)).unwrap();
        let cert = pa_free_certificate(&f, &g, &p).unwrap();
        assert_eq!(cert.claim().kind(), "FreeCert");
        assert!(Certificate::replay(&cert.to_json()).is_ok());
        let gens = Generators::new(&f, &g);
        let w: Word = "aBAb".parse().unwrap();
        assert!(!gens.evaluate(&w).is_identity());
    }
}
