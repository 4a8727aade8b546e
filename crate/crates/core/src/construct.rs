use crate::error::{Error, Result};
use crate::plane::{Line, Order, PartialPlane};

/// `n + 2` lines in general position, realized combinatorially.
///
/// Each unordered pair `{i, j}` of the `n + 2` lines gets its own point,
/// numbered in lexicographic pair order; line `i` is the set of points of the
/// pairs containing `i`. Every point that appears lies on exactly two lines,
/// and for odd `n` the plane is saturated.
pub fn construct_odd_order_sppp(n: usize) -> Result<PartialPlane> {
    if n < 3 || n.is_multiple_of(2) {
        return Err(Error::invalid(format!(
            "construction needs an odd order >= 3, got {n}"
        )));
    }
    let order = Order::new(n)?;
    let m = n + 2;
    let mut pair_id = vec![vec![0usize; m]; m];
    let mut next = 0;
    for i in 0..m {
        for j in i + 1..m {
            pair_id[i][j] = next;
            pair_id[j][i] = next;
            next += 1;
        }
    }
    let lines = (0..m)
        .map(|i| Line::new((0..m).filter(|&j| j != i).map(|j| pair_id[i][j])))
        .collect::<Result<Vec<_>>>()?;
    PartialPlane::new(order, lines)
}
