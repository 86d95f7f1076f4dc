use std::collections::HashMap;

use crate::hypgeo::{hyp_distance, DiskPoint};

/// Deduplicating point registry.
///
/// Points are quantized onto a Euclidean grid; lookups probe the 3×3 block of
/// cells around the query so near-boundary quantization cannot split a true
/// duplicate, then confirm with a hyperbolic distance test. Sound whenever
/// genuine duplicates agree to well under `cell` and distinct points are
/// separated by much more than `tol` (the Euclidean metric underestimates the
/// hyperbolic one, so hyperbolic separation implies Euclidean separation).
#[derive(Debug, Clone)]
pub struct PointKeyMap {
    cell: f64,
    tol: f64,
    points: Vec<DiskPoint>,
    by_cell: HashMap<(i64, i64), Vec<u32>>,
}

impl PointKeyMap {
    pub fn new(cell: f64, tol: f64) -> Self {
        assert!(cell > 0.0 && tol > 0.0);
        Self {
            cell,
            tol,
            points: Vec::new(),
            by_cell: HashMap::new(),
        }
    }

    fn cell_of(&self, p: DiskPoint) -> (i64, i64) {
        (
            (p.x() / self.cell).floor() as i64,
            (p.y() / self.cell).floor() as i64,
        )
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn point(&self, id: u32) -> DiskPoint {
        self.points[id as usize]
    }

    pub fn points(&self) -> &[DiskPoint] {
        &self.points
    }

    pub fn find(&self, p: DiskPoint) -> Option<u32> {
        let (cx, cy) = self.cell_of(p);
        for dx in -1..=1 {
            for dy in -1..=1 {
                if let Some(ids) = self.by_cell.get(&(cx + dx, cy + dy)) {
                    for &id in ids {
                        if hyp_distance(self.points[id as usize], p) < self.tol {
                            return Some(id);
                        }
                    }
                }
            }
        }
        None
    }

    /// Returns the id of `p`, inserting it if no existing point matches.
    /// The bool is true when the point was newly inserted.
    pub fn find_or_insert(&mut self, p: DiskPoint) -> (u32, bool) {
        if let Some(id) = self.find(p) {
            return (id, false);
        }
        let id = self.points.len() as u32;
        self.points.push(p);
        let key = self.cell_of(p);
        self.by_cell.entry(key).or_default().push(id);
        (id, true)
    }
}

/// Spatial hash for range queries among disk points.
///
/// Cells are sized so that any pair within hyperbolic distance `reach` falls
/// in adjacent cells: Euclidean distance never exceeds hyperbolic distance in
/// this model, so probing the 3×3 neighborhood of cells of side `reach` finds
/// every candidate.
#[derive(Debug, Clone)]
pub struct SpatialHash {
    cell: f64,
    points: Vec<DiskPoint>,
    by_cell: HashMap<(i64, i64), Vec<u32>>,
}

impl SpatialHash {
    pub fn new(reach: f64) -> Self {
        assert!(reach > 0.0);
        Self {
            cell: reach,
            points: Vec::new(),
            by_cell: HashMap::new(),
        }
    }

    pub fn insert(&mut self, p: DiskPoint) -> u32 {
        let id = self.points.len() as u32;
        self.points.push(p);
        let key = (
            (p.x() / self.cell).floor() as i64,
            (p.y() / self.cell).floor() as i64,
        );
        self.by_cell.entry(key).or_default().push(id);
        id
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn point(&self, id: u32) -> DiskPoint {
        self.points[id as usize]
    }

    /// Ids of all stored points within hyperbolic distance `dist` of `p`,
    /// for any dist ≤ the construction reach. Ascending id order.
    pub fn within(&self, p: DiskPoint, dist: f64) -> Vec<u32> {
        debug_assert!(dist <= self.cell + 1e-12);
        let cx = (p.x() / self.cell).floor() as i64;
        let cy = (p.y() / self.cell).floor() as i64;
        let mut out = Vec::new();
        for dx in -1..=1 {
            for dy in -1..=1 {
                if let Some(ids) = self.by_cell.get(&(cx + dx, cy + dy)) {
                    for &id in ids {
                        if hyp_distance(self.points[id as usize], p) <= dist {
                            out.push(id);
                        }
                    }
                }
            }
        }
        out.sort_unstable();
        out
    }
}
