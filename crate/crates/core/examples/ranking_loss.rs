//! Evaluates the ranking loss and WHDR of two depth maps on a handful of
//! ordinal queries.

use dynocc::imaging::PixelPoint;
use dynocc::metrics::{
    query_losses, ranking_loss, top_fraction, whdr_from_depth, DepthMap, Query, QuerySet,
};
use dynocc::sampling::Ordinal;

fn main() -> dynocc::Result<()> {
    let q = |i: (i32, i32), j: (i32, i32), o| Query {
        i: PixelPoint::new(i.0, i.1),
        j: PixelPoint::new(j.0, j.1),
        o,
        weight: 1.0,
    };
    let queries = QuerySet::new(vec![
        q((1, 1), (6, 1), Ordinal::Closer),
        q((6, 6), (1, 6), Ordinal::Further),
        q((2, 2), (3, 3), Ordinal::Same),
        q((0, 7), (7, 0), Ordinal::Closer),
    ]);
    // larger value = closer; the first map slopes the right way, the second does not
    let good = DepthMap::from_fn(8, 8, |x, _| 1.0 - x as f64 / 8.0)?;
    let bad = DepthMap::from_fn(8, 8, |x, y| (x + y) as f64 / 16.0)?;

    for (name, z) in [("sloped", &good), ("diagonal", &bad)] {
        let losses = query_losses(z, &queries)?;
        println!(
            "{name}: loss {:.4}, whdr {:.2}, hardest half {:?}",
            ranking_loss(z, &queries)?,
            whdr_from_depth(z, &queries, 0.02)?,
            top_fraction(&losses, 0.5)
        );
    }
    Ok(())
}
