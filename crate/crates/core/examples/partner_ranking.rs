//! Greedy partner choice from a handful of candidates, and a coarse map of
//! the ranking score around the source-destination segment.

use af_relay::partner::{rank_map, Axis, CandidateRanking};
use af_relay::{greedy_select, LinkPair, Point, Result};

pub fn run() -> Result<(CandidateRanking, (f64, f64, f64))> {
    let candidates = [
        LinkPair::new(0.9, 0.4),
        LinkPair::new(0.5, 0.6),
        LinkPair::new(0.2, 1.0),
        LinkPair::new(1.1, 0.3),
    ];
    let ranking = greedy_select(&candidates, 3.0)?;
    let grid = rank_map(
        Axis::new(-0.5, 1.5, 81)?,
        Axis::new(-1.0, 1.0, 81)?,
        Point::new(0.0, 0.0),
        Point::new(1.0, 0.0),
        3.0,
    )?;
    Ok((ranking, grid.argmin().expect("grid has interior points")))
}

fn main() -> Result<()> {
    let (ranking, (x, y, r)) = run()?;
    for (i, score) in &ranking.scores {
        println!("candidate {i}: r = {score:.4}");
    }
    println!("chosen: {}", ranking.chosen);
    println!("best grid position ({x:.3}, {y:.3}) with r = {r:.4}");
    Ok(())
}
