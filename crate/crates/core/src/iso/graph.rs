use crate::error::{Error, Result};
use crate::plane::{PartialPlane, PointSet};

/// Point-line incidence graph of a plane.
///
/// Vertices `0..points` are the points of the universe, the next `lines`
/// vertices are the lines in plane order, and an optional final marker
/// vertex is joined to every marked point. With side coloring (the default)
/// points and lines start in different color classes, so graph isomorphism
/// coincides with incidence-structure isomorphism, projective planes
/// included.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IncidenceGraph {
    points: usize,
    lines: usize,
    marker: bool,
    side_colored: bool,
    adj: Vec<Vec<u32>>,
}

impl IncidenceGraph {
    fn from_plane(p: &PartialPlane, marked: Option<PointSet>, side_colored: bool) -> Result<Self> {
        let points = p.order().universe_size();
        let lines = p.size();
        let total = points + lines + usize::from(marked.is_some());
        let mut adj = vec![Vec::new(); total];
        for (i, line) in p.lines().iter().enumerate() {
            let lv = (points + i) as u32;
            for pt in line.points().iter() {
                if pt >= points {
                    return Err(Error::invalid(format!("point {pt} outside universe")));
                }
                adj[pt].push(lv);
                adj[lv as usize].push(pt as u32);
            }
        }
        if let Some(m) = marked {
            if !m.is_subset(p.order().universe()) {
                return Err(Error::invalid(format!(
                    "marked points {m:?} outside universe"
                )));
            }
            let mv = (total - 1) as u32;
            for pt in m.iter() {
                adj[pt].push(mv);
                adj[mv as usize].push(pt as u32);
            }
        }
        for a in &mut adj {
            a.sort_unstable();
        }
        Ok(IncidenceGraph {
            points,
            lines,
            marker: marked.is_some(),
            side_colored,
            adj,
        })
    }

    pub fn point_count(&self) -> usize {
        self.points
    }

    pub fn line_count(&self) -> usize {
        self.lines
    }

    pub fn has_marker(&self) -> bool {
        self.marker
    }

    pub fn is_side_colored(&self) -> bool {
        self.side_colored
    }

    pub fn vertex_count(&self) -> usize {
        self.adj.len()
    }

    pub fn edge_count(&self) -> usize {
        self.adj.iter().map(Vec::len).sum::<usize>() / 2
    }

    pub fn degree(&self, v: usize) -> usize {
        self.adj[v].len()
    }

    pub fn neighbors(&self, v: usize) -> &[u32] {
        &self.adj[v]
    }

    /// Dense initial color per vertex.
    pub fn initial_colors(&self) -> Vec<u32> {
        let line_color = u32::from(self.side_colored);
        let marker_color = line_color + 1;
        let mut colors = vec![0u32; self.vertex_count()];
        for c in &mut colors[self.points..self.points + self.lines] {
            *c = line_color;
        }
        if self.marker {
            *colors.last_mut().unwrap() = marker_color;
        }
        // Keep classes dense when a side is empty (e.g. no lines).
        let mut present: Vec<u32> = colors.clone();
        present.sort_unstable();
        present.dedup();
        for c in &mut colors {
            *c = present.binary_search(c).unwrap() as u32;
        }
        colors
    }
}

/// Side-colored incidence graph, with a marker vertex when `marked` is given
/// (even if the set is empty).
pub fn build_incidence_graph(p: &PartialPlane, marked: Option<PointSet>) -> Result<IncidenceGraph> {
    IncidenceGraph::from_plane(p, marked, true)
}

/// Incidence graph with points and lines in one color class.
pub fn build_uncolored_incidence_graph(p: &PartialPlane) -> Result<IncidenceGraph> {
    IncidenceGraph::from_plane(p, None, false)
}
