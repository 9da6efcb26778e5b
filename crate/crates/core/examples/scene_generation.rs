//! Generate a scene, spawn a task and print a map of the layout.

use owmm_bench::world::{generate_scene, spawn_task, Cell, SceneParams};

fn main() {
    let seed = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(7);
    let scene = generate_scene(seed, &SceneParams::default()).expect("scene");
    let task = spawn_task(&scene, seed).expect("task");

    let g = &scene.occupancy;
    for j in (0..g.height()).rev().step_by(2) {
        let row: String = (0..g.width())
            .map(|i| {
                let c = scene.cell_center(Cell::new(i, j));
                match scene.receptacles.iter().position(|r| r.contains_xy(c[0], c[1])) {
                    Some(k) => char::from(b'A' + k as u8),
                    None if g.is_blocked(Cell::new(i, j)) => '#',
                    None => '.',
                }
            })
            .collect();
        println!("{row}");
    }
    for (k, r) in scene.receptacles.iter().enumerate() {
        println!(
            "{} {} {:<40} at ({:.2}, {:.2}) height {:.2}",
            char::from(b'A' + k as u8),
            r.rec_id,
            r.label,
            r.center[0],
            r.center[1],
            r.height
        );
    }
    println!("\n{}", task.instruction);
}
