//! The four known saturated planes of order 6 and size 25.

use crate::io::import_braces;
use crate::plane::{Order, PartialPlane};

/// Brace-notation source of the four size-25 planes.
pub const APPENDIX_BRACES: &str = include_str!("../data/appendix_planes.txt");

/// The four size-25 planes of order 6, in their published order.
pub fn appendix_planes() -> Vec<PartialPlane> {
    import_braces(APPENDIX_BRACES, Order::new(6).expect("order 6"))
        .expect("bundled appendix planes are well formed")
}
