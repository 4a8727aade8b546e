//! Isomorphism classes of planes via canonical forms of incidence graphs.

mod canon;
mod graph;

use std::collections::HashSet;

use rayon::prelude::*;

pub use canon::{canonical_form, canonical_form_with_stats, CanonicalCertificate};
pub use graph::{build_incidence_graph, build_uncolored_incidence_graph, IncidenceGraph};

use crate::error::{Error, Result};
use crate::plane::{PartialPlane, PointSet};

/// Certificate of a plane's side-colored (optionally marked) incidence graph.
pub fn plane_certificate(
    p: &PartialPlane,
    marked: Option<PointSet>,
) -> Result<CanonicalCertificate> {
    Ok(canonical_form(&build_incidence_graph(p, marked)?))
}

/// Isomorphism of planes of one order, with optional marked point sets
/// (one per plane) that the isomorphism must carry onto each other.
pub fn planes_isomorphic(
    a: &PartialPlane,
    b: &PartialPlane,
    marked: Option<(PointSet, PointSet)>,
) -> Result<bool> {
    if a.order() != b.order() {
        return Err(Error::invalid(format!(
            "orders differ: {} vs {}",
            a.order(),
            b.order()
        )));
    }
    if a.size() != b.size() {
        return Ok(false);
    }
    let (ma, mb) = match marked {
        Some((x, y)) => (Some(x), Some(y)),
        None => (None, None),
    };
    Ok(plane_certificate(a, ma)? == plane_certificate(b, mb)?)
}

/// One representative per isomorphism class, the first seen in `ps`,
/// sorted by certificate.
pub fn dedupe(ps: &[PartialPlane], marked: Option<PointSet>) -> Result<Vec<PartialPlane>> {
    Ok(dedupe_with_certificates(ps, marked)?
        .into_iter()
        .map(|(_, p)| p)
        .collect())
}

pub fn dedupe_with_certificates(
    ps: &[PartialPlane],
    marked: Option<PointSet>,
) -> Result<Vec<(CanonicalCertificate, PartialPlane)>> {
    if let Some(first) = ps.first() {
        if let Some(bad) = ps.iter().find(|p| p.order() != first.order()) {
            return Err(Error::invalid(format!(
                "mixed orders {} and {}",
                first.order(),
                bad.order()
            )));
        }
    }
    let certs = ps
        .par_iter()
        .map(|p| plane_certificate(p, marked))
        .collect::<Result<Vec<_>>>()?;
    let mut seen = HashSet::new();
    let mut out: Vec<(CanonicalCertificate, PartialPlane)> = certs
        .into_iter()
        .zip(ps)
        .filter(|(c, _)| seen.insert(c.clone()))
        .map(|(c, p)| (c, p.clone()))
        .collect();
    out.sort_by(|a, b| a.0.cmp(&b.0));
    Ok(out)
}
