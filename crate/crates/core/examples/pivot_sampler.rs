//! The iterative sample-and-refit point search on a distance scorer.

use owmm_bench::policy::{pivot_sample, PivotConfig};

fn main() {
    let target = [380.0, 140.0];
    let scorer = |p: [f64; 2]| -(p[0] - target[0]).hypot(p[1] - target[1]);
    let r = pivot_sample(&scorer, &PivotConfig::default(), 3);
    for (i, round) in r.rounds.iter().enumerate() {
        let best = round.kept[0];
        println!(
            "round {i}: best sample ({:.0}, {:.0}) score {:.1}, next mean ({:.0}, {:.0}) std ({:.0}, {:.0})",
            round.samples[best][0],
            round.samples[best][1],
            round.scores[best],
            round.mean[0],
            round.mean[1],
            round.std[0],
            round.std[1]
        );
    }
    println!("answer ({:.0}, {:.0}) box {:?}", r.point[0], r.point[1], r.bbox_norm);
}
