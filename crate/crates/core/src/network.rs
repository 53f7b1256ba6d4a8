//! Homogeneous Poisson node sets over a disk or square region, indexed by a
//! uniform grid for range and wedge queries.

use std::f64::consts::PI;
use std::io::{Read, Write};
use std::str::FromStr;

use rand::Rng;
use rand_distr::{Distribution, Poisson};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{wedge_contains, Point2D, Wedge};
use crate::rng::stream_rng;

/// Dense node index in generation order.
pub type NodeId = usize;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RegionKind {
    Disk,
    Square,
}

impl FromStr for RegionKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "disk" => Ok(RegionKind::Disk),
            "square" => Ok(RegionKind::Square),
            other => Err(Error::invalid(format!("unknown region kind `{other}`"))),
        }
    }
}

/// Network region centred at the origin. `size` is the radius of a disk or
/// the side length of a square.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RegionSpec {
    pub kind: RegionKind,
    pub size: f64,
}

impl RegionSpec {
    pub fn new(kind: RegionKind, size: f64) -> Result<Self> {
        if !(size > 0.0 && size.is_finite()) {
            return Err(Error::invalid(format!("region size must be positive, got {size}")));
        }
        Ok(Self { kind, size })
    }

    pub fn disk(radius: f64) -> Result<Self> {
        Self::new(RegionKind::Disk, radius)
    }

    pub fn square(side: f64) -> Result<Self> {
        Self::new(RegionKind::Square, side)
    }

    /// Region of the given kind with area `area`.
    pub fn with_area(kind: RegionKind, area: f64) -> Result<Self> {
        match kind {
            RegionKind::Disk => Self::disk((area / PI).sqrt()),
            RegionKind::Square => Self::square(area.sqrt()),
        }
    }

    pub fn area(&self) -> f64 {
        match self.kind {
            RegionKind::Disk => PI * self.size * self.size,
            RegionKind::Square => self.size * self.size,
        }
    }

    fn half_extent(&self) -> f64 {
        match self.kind {
            RegionKind::Disk => self.size,
            RegionKind::Square => 0.5 * self.size,
        }
    }

    pub fn contains(&self, p: Point2D) -> bool {
        self.boundary_distance(p) >= -1e-12 * self.size
    }

    /// Signed distance to the boundary, positive inside.
    pub fn boundary_distance(&self, p: Point2D) -> f64 {
        match self.kind {
            RegionKind::Disk => self.size - p.norm(),
            RegionKind::Square => {
                let h = 0.5 * self.size;
                (h - p.x.abs()).min(h - p.y.abs())
            }
        }
    }

    /// Direction (radians) of the outward normal at the boundary point
    /// nearest to `p`.
    pub fn outward_normal(&self, p: Point2D) -> f64 {
        match self.kind {
            RegionKind::Disk => p.angle(),
            RegionKind::Square => {
                if p.x.abs() >= p.y.abs() {
                    if p.x >= 0.0 {
                        0.0
                    } else {
                        PI
                    }
                } else if p.y >= 0.0 {
                    PI / 2.0
                } else {
                    -PI / 2.0
                }
            }
        }
    }

    pub fn sample_uniform<R: Rng + ?Sized>(&self, rng: &mut R) -> Point2D {
        match self.kind {
            RegionKind::Disk => {
                let radius = self.size * rng.random::<f64>().sqrt();
                let angle = 2.0 * PI * rng.random::<f64>();
                Point2D::from_polar(radius, angle)
            }
            RegionKind::Square => Point2D::new(
                (rng.random::<f64>() - 0.5) * self.size,
                (rng.random::<f64>() - 0.5) * self.size,
            ),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NetworkParams {
    pub lambda: f64,
    #[serde(rename = "R")]
    pub range: f64,
    pub eta: f64,
    pub region: RegionSpec,
}

impl NetworkParams {
    pub fn new(lambda: f64, range: f64, eta: f64, region: RegionSpec) -> Result<Self> {
        if !(lambda > 0.0 && lambda.is_finite()) {
            return Err(Error::invalid(format!("lambda must be positive, got {lambda}")));
        }
        if !(range > 0.0 && range.is_finite()) {
            return Err(Error::invalid(format!("R must be positive, got {range}")));
        }
        if !(eta > 0.0 && eta <= 1.0) {
            return Err(Error::invalid(format!("eta must lie in (0, 1], got {eta}")));
        }
        let p = Self { lambda, range, eta, region };
        let d = p.normalized_disk_area();
        if !(d > 0.0 && d <= 1.0) {
            return Err(Error::invalid(format!(
                "πR²/|A| must lie in (0, 1], got {d}; enlarge the region or shrink R"
            )));
        }
        Ok(p)
    }

    /// Parameters from the expected node count `n` and `d = πR²/|A|`.
    pub fn from_n_d(n: f64, d: f64, eta: f64, range: f64, kind: RegionKind) -> Result<Self> {
        if !(d > 0.0 && d <= 1.0) {
            return Err(Error::invalid(format!("d must lie in (0, 1], got {d}")));
        }
        let area = PI * range * range / d;
        Self::new(n / area, range, eta, RegionSpec::with_area(kind, area)?)
    }

    /// `N = λ|A|`.
    pub fn expected_nodes(&self) -> f64 {
        self.lambda * self.region.area()
    }

    /// `d = πR²/|A|`.
    pub fn normalized_disk_area(&self) -> f64 {
        PI * self.range * self.range / self.region.area()
    }
}

/// Uniform bucket grid in compressed-row form: the node ids of cell `c` are
/// `entries[starts[c]..starts[c + 1]]`.
#[derive(Debug, Clone)]
struct SpatialGrid {
    min: Point2D,
    cell: f64,
    cols: usize,
    rows: usize,
    starts: Vec<u32>,
    entries: Vec<u32>,
}

/// Upper bound on grid cells per axis, keeps memory bounded when R is tiny
/// relative to the region.
const MAX_CELLS_PER_AXIS: usize = 2048;

impl SpatialGrid {
    fn build(positions: &[Point2D], half_extent: f64, cell_size: f64) -> Self {
        let extent = 2.0 * half_extent;
        let cell = cell_size.max(extent / MAX_CELLS_PER_AXIS as f64);
        let cols = ((extent / cell).ceil() as usize).max(1);
        let rows = cols;
        let min = Point2D::new(-half_extent, -half_extent);
        let mut grid =
            Self { min, cell, cols, rows, starts: vec![0; cols * rows + 1], entries: Vec::new() };
        let cells: Vec<usize> = positions.iter().map(|&p| grid.cell_index(p)).collect();
        for &c in &cells {
            grid.starts[c + 1] += 1;
        }
        for c in 0..cols * rows {
            grid.starts[c + 1] += grid.starts[c];
        }
        let mut fill = grid.starts.clone();
        grid.entries = vec![0; positions.len()];
        for (id, &c) in cells.iter().enumerate() {
            grid.entries[fill[c] as usize] = id as u32;
            fill[c] += 1;
        }
        grid
    }

    fn coords(&self, p: Point2D) -> (usize, usize) {
        let cx = ((p.x - self.min.x) / self.cell).floor().clamp(0.0, (self.cols - 1) as f64);
        let cy = ((p.y - self.min.y) / self.cell).floor().clamp(0.0, (self.rows - 1) as f64);
        (cx as usize, cy as usize)
    }

    fn cell_index(&self, p: Point2D) -> usize {
        let (cx, cy) = self.coords(p);
        cy * self.cols + cx
    }

    /// Ids in every cell overlapping the box `[lo, hi]`.
    fn visit_box(&self, lo: Point2D, hi: Point2D, mut f: impl FnMut(usize)) {
        let (x0, y0) = self.coords(lo);
        let (x1, y1) = self.coords(hi);
        for cy in y0..=y1 {
            let row = cy * self.cols;
            let (a, b) = (self.starts[row + x0] as usize, self.starts[row + x1 + 1] as usize);
            for &id in &self.entries[a..b] {
                f(id as usize);
            }
        }
    }
}

/// A realized node set. Immutable once built.
#[derive(Debug, Clone)]
pub struct NodeSet {
    positions: Vec<Point2D>,
    region: RegionSpec,
    grid: SpatialGrid,
}

impl NodeSet {
    /// Builds the index over `positions`, which must all lie in `region`.
    pub fn from_positions(
        positions: Vec<Point2D>,
        region: RegionSpec,
        cell_size: f64,
    ) -> Result<Self> {
        if !(cell_size > 0.0) {
            return Err(Error::invalid("grid cell size must be positive"));
        }
        if let Some((id, p)) =
            positions.iter().enumerate().find(|(_, p)| !p.is_finite() || !region.contains(**p))
        {
            return Err(Error::invalid(format!("node {id} at ({}, {}) lies outside the region", p.x, p.y)));
        }
        let grid = SpatialGrid::build(&positions, region.half_extent(), cell_size);
        Ok(Self { positions, region, grid })
    }

    pub fn len(&self) -> usize {
        self.positions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.positions.is_empty()
    }

    pub fn positions(&self) -> &[Point2D] {
        &self.positions
    }

    pub fn position(&self, id: NodeId) -> Result<Point2D> {
        self.positions.get(id).copied().ok_or(Error::UnknownNode(id))
    }

    pub fn region(&self) -> &RegionSpec {
        &self.region
    }

    /// Nodes other than `exclude` inside `w`.
    pub fn neighbors_in_wedge(&self, w: &Wedge, exclude: Option<NodeId>) -> Vec<NodeId> {
        let mut out = Vec::new();
        self.for_each_in_wedge(w, exclude, |id, _| out.push(id));
        out
    }

    pub fn for_each_in_wedge(
        &self,
        w: &Wedge,
        exclude: Option<NodeId>,
        mut f: impl FnMut(NodeId, Point2D),
    ) {
        let (lo, hi) = w.bounding_box();
        self.grid.visit_box(lo, hi, |id| {
            let p = self.positions[id];
            if Some(id) != exclude && wedge_contains(w, p) {
                f(id, p);
            }
        });
    }

    /// Nodes other than `exclude` within `radius` of `center` (closed disk).
    pub fn neighbors_in_disk(
        &self,
        center: Point2D,
        radius: f64,
        exclude: Option<NodeId>,
    ) -> Vec<NodeId> {
        let mut out = Vec::new();
        self.for_each_in_disk(center, radius, exclude, |id, _| out.push(id));
        out
    }

    pub fn for_each_in_disk(
        &self,
        center: Point2D,
        radius: f64,
        exclude: Option<NodeId>,
        mut f: impl FnMut(NodeId, Point2D),
    ) {
        let r = Point2D::new(radius, radius);
        let r2 = radius * radius;
        self.grid.visit_box(center - r, center + r, |id| {
            let p = self.positions[id];
            if Some(id) != exclude && (p - center).norm_sq() <= r2 {
                f(id, p);
            }
        });
    }

    /// Writes `id,x,y` rows.
    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(writer);
        w.write_record(["id", "x", "y"])?;
        for (id, p) in self.positions.iter().enumerate() {
            w.write_record([id.to_string(), format_coord(p.x), format_coord(p.y)])?;
        }
        w.flush()?;
        Ok(())
    }

    /// Reads a file produced by [`NodeSet::write_csv`]. Ids must be dense and
    /// in order.
    pub fn read_csv<R: Read>(reader: R, region: RegionSpec, cell_size: f64) -> Result<Self> {
        let mut rdr = csv::Reader::from_reader(reader);
        let headers = rdr.headers()?.clone();
        if headers.iter().collect::<Vec<_>>() != ["id", "x", "y"] {
            return Err(Error::MalformedNodeFile { line: 1, message: "expected header `id,x,y`".into() });
        }
        let mut positions = Vec::new();
        for record in rdr.records() {
            let record = record?;
            let line = record.position().map_or(0, |p| p.line());
            let bad = |message: String| Error::MalformedNodeFile { line, message };
            let parse = |k: usize| -> Result<f64> {
                record[k].trim().parse::<f64>().map_err(|e| bad(format!("column {k}: {e}")))
            };
            let id: usize =
                record[0].trim().parse().map_err(|e| bad(format!("bad id: {e}")))?;
            if id != positions.len() {
                return Err(bad(format!("expected id {}, found {id}", positions.len())));
            }
            positions.push(Point2D::new(parse(1)?, parse(2)?));
        }
        Self::from_positions(positions, region, cell_size)
    }
}

/// 17 significant digits, enough to round-trip any `f64`.
fn format_coord(v: f64) -> String {
    format!("{v:.16e}")
}

/// Interior/edge split of a node set.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct NodeClasses {
    pub interior: Vec<NodeId>,
    pub edge: Vec<NodeId>,
}

/// Interior nodes lie farther than `range` from the region boundary.
pub fn classify_nodes(ns: &NodeSet, range: f64) -> NodeClasses {
    let mut out = NodeClasses::default();
    for (id, &p) in ns.positions.iter().enumerate() {
        if ns.region.boundary_distance(p) > range {
            out.interior.push(id);
        } else {
            out.edge.push(id);
        }
    }
    out
}

/// Positions of a Poisson process on the region: Poisson count, then
/// i.i.d. uniform placement.
pub fn sample_ppp_positions<R: Rng + ?Sized>(params: &NetworkParams, rng: &mut R) -> Vec<Point2D> {
    let mean = params.expected_nodes();
    let count = if mean > 0.0 {
        Poisson::new(mean).map(|p| p.sample(rng) as usize).unwrap_or(0)
    } else {
        0
    };
    (0..count).map(|_| params.region.sample_uniform(rng)).collect()
}

pub fn generate_ppp_with<R: Rng + ?Sized>(params: &NetworkParams, rng: &mut R) -> NodeSet {
    let positions = sample_ppp_positions(params, rng);
    let grid = SpatialGrid::build(&positions, params.region.half_extent(), params.range);
    NodeSet { positions, region: params.region, grid }
}

/// Poisson node set for `seed` (stream 0 of the seed).
pub fn generate_ppp(params: &NetworkParams, seed: u64) -> NodeSet {
    generate_ppp_with(params, &mut stream_rng(seed, 0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::stats::Moments;
    use proptest::prelude::*;
    use rand::Rng;

    fn params(lambda: f64, kind: RegionKind, size: f64) -> NetworkParams {
        NetworkParams::new(lambda, 1.0, 0.5, RegionSpec::new(kind, size).unwrap()).unwrap()
    }

    #[test]
    fn params_validation_and_derived_quantities() {
        let p = params(2.0, RegionKind::Square, 10.0);
        assert_eq!(p.expected_nodes(), 200.0);
        assert!((p.normalized_disk_area() - PI / 100.0).abs() < 1e-15);
        assert!(NetworkParams::new(0.0, 1.0, 0.5, RegionSpec::disk(5.0).unwrap()).is_err());
        assert!(NetworkParams::new(1.0, 1.0, 0.0, RegionSpec::disk(5.0).unwrap()).is_err());
        assert!(NetworkParams::new(1.0, 2.0, 0.5, RegionSpec::disk(1.0).unwrap()).is_err());
        assert!(RegionSpec::disk(0.0).is_err());
        let q = NetworkParams::from_n_d(3000.0, 0.01, 0.5, 1.0, RegionKind::Disk).unwrap();
        assert!((q.expected_nodes() - 3000.0).abs() < 1e-9);
        assert!((q.normalized_disk_area() - 0.01).abs() < 1e-15);
        assert!((q.region.size - 10.0).abs() < 1e-12);
    }

    #[test]
    fn near_zero_intensity_gives_empty_set() {
        let p = params(1e-12, RegionKind::Disk, 10.0);
        assert!(p.expected_nodes() < 1e-9);
        for seed in 0..100 {
            assert!(generate_ppp(&p, seed).is_empty());
        }
    }

    #[test]
    fn counts_are_poisson_and_positions_contained() {
        let p = params(1000.0 / 100.0, RegionKind::Square, 10.0);
        let disk = params(10.0, RegionKind::Disk, 5.0);
        let seeds = 10_000;
        let mut m = Moments::new();
        // sub-disk of radius 1.5 at (1, -1): area B
        let b = PI * 1.5 * 1.5;
        let mut sub = Moments::new();
        for seed in 0..seeds {
            let ns = generate_ppp(&p, seed);
            m.push(ns.len() as f64);
            sub.push(ns.neighbors_in_disk(Point2D::new(1.0, -1.0), 1.5, None).len() as f64);
            let nd = generate_ppp(&disk, seed);
            assert!(nd.positions().iter().all(|q| q.norm() <= 5.0));
        }
        assert!((m.mean() - 1000.0).abs() <= 3.0 * (1000.0 / seeds as f64).sqrt(), "mean {}", m.mean());
        assert!((m.variance() - 1000.0).abs() <= 3.0 * (2.0e6 / seeds as f64).sqrt());
        // variance of a Poisson count equals its mean; the sample variance has
        // standard error ≈ sqrt(2μ²/n) for large μ
        let mu = 10.0 * b;
        assert!((sub.mean() - mu).abs() < 3.0 * (mu / seeds as f64).sqrt());
        let var_se = ((2.0 * mu * mu + mu) / seeds as f64).sqrt();
        assert!((sub.variance() - mu).abs() < 3.0 * var_se, "{} vs {mu}", sub.variance());
    }

    #[test]
    fn generation_is_deterministic() {
        let p = params(3.0, RegionKind::Disk, 8.0);
        let a = generate_ppp(&p, 42);
        let b = generate_ppp(&p, 42);
        assert_eq!(a.positions(), b.positions());
        assert_ne!(a.positions(), generate_ppp(&p, 43).positions());
    }

    fn brute_wedge(ns: &NodeSet, w: &Wedge, exclude: Option<NodeId>) -> Vec<NodeId> {
        (0..ns.len()).filter(|&i| Some(i) != exclude && w.contains(ns.positions()[i])).collect()
    }

    #[test]
    fn wedge_queries_match_brute_force() {
        let p = params(2.0, RegionKind::Square, 12.0);
        let mut rng = stream_rng(5, 1);
        for seed in 0..1000 {
            let ns = generate_ppp(&p, seed);
            let apex = p.region.sample_uniform(&mut rng);
            let w = Wedge::eta_disk(apex, rng.random::<f64>() * 6.0 - 3.0, 1.0, rng.random::<f64>().max(0.01))
                .unwrap();
            let exclude = (!ns.is_empty()).then(|| seed as usize % ns.len());
            let mut got = ns.neighbors_in_wedge(&w, exclude);
            got.sort_unstable();
            assert_eq!(got, brute_wedge(&ns, &w, exclude));
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(128))]
        #[test]
        fn disk_and_wedge_queries_equal_scan(
            seed in 0u64..10_000, ax in -6.0f64..6.0, ay in -6.0f64..6.0,
            o in -3.2f64..3.2, eta in 0.05f64..1.0, radius in 0.2f64..3.0,
        ) {
            let p = params(1.5, RegionKind::Square, 12.0);
            let ns = generate_ppp(&p, seed);
            let w = Wedge::eta_disk(Point2D::new(ax, ay), o, radius, eta).unwrap();
            let mut got = ns.neighbors_in_wedge(&w, None);
            got.sort_unstable();
            prop_assert_eq!(got, brute_wedge(&ns, &w, None));
            let c = Point2D::new(ax, ay);
            let mut disk = ns.neighbors_in_disk(c, radius, None);
            disk.sort_unstable();
            let scan: Vec<NodeId> = (0..ns.len()).filter(|&i| ns.positions()[i].distance(c) <= radius).collect();
            prop_assert_eq!(disk, scan);
        }
    }

    #[test]
    fn empty_and_far_queries() {
        let empty = NodeSet::from_positions(Vec::new(), RegionSpec::disk(5.0).unwrap(), 1.0).unwrap();
        let w = Wedge::eta_disk(Point2D::ORIGIN, 0.0, 1.0, 0.5).unwrap();
        assert!(empty.neighbors_in_wedge(&w, None).is_empty());
        let ns = NodeSet::from_positions(
            vec![Point2D::new(-4.0, -4.0), Point2D::new(-3.5, -4.0)],
            RegionSpec::square(10.0).unwrap(),
            1.0,
        )
        .unwrap();
        let far = Wedge::eta_disk(Point2D::new(4.0, 4.0), 0.0, 1.0, 0.5).unwrap();
        assert!(ns.neighbors_in_wedge(&far, None).is_empty());
        assert!(NodeSet::from_positions(vec![Point2D::new(9.0, 0.0)], RegionSpec::disk(5.0).unwrap(), 1.0)
            .is_err());
    }

    #[test]
    fn classification() {
        let region = RegionSpec::disk(5.0).unwrap();
        let ns = NodeSet::from_positions(
            vec![Point2D::ORIGIN, Point2D::new(5.0, 0.0), Point2D::new(0.0, 4.5), Point2D::new(3.9, 0.0)],
            region,
            1.0,
        )
        .unwrap();
        let c = classify_nodes(&ns, 1.0);
        assert_eq!(c.interior, vec![0, 3]);
        assert_eq!(c.edge, vec![1, 2]);
    }

    #[test]
    fn edge_fraction_matches_annulus_share() {
        // disk of radius L = R/√d: edge nodes occupy the outer annulus of
        // width R, i.e. a fraction (2 − √d)√d of the area.
        let d: f64 = 0.04;
        let p = NetworkParams::from_n_d(2000.0, d, 0.5, 1.0, RegionKind::Disk).unwrap();
        let (mut edge, mut total) = (0usize, 0usize);
        for seed in 0..200 {
            let ns = generate_ppp(&p, seed);
            edge += classify_nodes(&ns, 1.0).edge.len();
            total += ns.len();
        }
        let f = edge as f64 / total as f64;
        let expected = (2.0 - d.sqrt()) * d.sqrt();
        let se = (expected * (1.0 - expected) / total as f64).sqrt();
        assert!((f - expected).abs() < 3.0 * se, "{f} vs {expected}");
    }

    #[test]
    fn csv_round_trip_is_exact() {
        let p = params(0.5, RegionKind::Disk, 6.0);
        let ns = generate_ppp(&p, 9);
        let mut buf = Vec::new();
        ns.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with("id,x,y\n"));
        let back = NodeSet::read_csv(buf.as_slice(), p.region, 1.0).unwrap();
        assert_eq!(back.positions(), ns.positions());
    }

    #[test]
    fn csv_errors_carry_line_numbers() {
        let region = RegionSpec::disk(6.0).unwrap();
        let bad = "id,x,y\n0,1.0,2.0\n1,abc,0\n";
        match NodeSet::read_csv(bad.as_bytes(), region, 1.0) {
            Err(Error::MalformedNodeFile { line, .. }) => assert_eq!(line, 3),
            other => panic!("unexpected {other:?}"),
        }
        assert!(NodeSet::read_csv("a,b\n".as_bytes(), region, 1.0).is_err());
    }

    #[test]
    fn region_geometry() {
        let sq = RegionSpec::square(4.0).unwrap();
        assert_eq!(sq.boundary_distance(Point2D::new(1.5, 0.2)), 0.5);
        assert_eq!(sq.outward_normal(Point2D::new(1.5, 0.2)), 0.0);
        assert_eq!(sq.outward_normal(Point2D::new(0.1, -1.9)), -PI / 2.0);
        let disk = RegionSpec::disk(2.0).unwrap();
        assert!((disk.outward_normal(Point2D::new(0.0, 1.0)) - PI / 2.0).abs() < 1e-15);
        assert!("hexagon".parse::<RegionKind>().is_err());
        assert_eq!("square".parse::<RegionKind>().unwrap(), RegionKind::Square);
    }
}
