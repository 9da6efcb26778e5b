//! Render the ego view at a scene frame and reverse-project each entity.

use owmm_bench::datagen::prepare_episode;
use owmm_bench::sim::bbox_center;
use owmm_bench::world::{generate_scene, SceneParams};

fn main() {
    let scene = generate_scene(5, &SceneParams::default()).expect("scene");
    let (task, frames) = prepare_episode(&scene, 5, 2).expect("episode");
    println!("{}", task.instruction);
    for f in &frames.frames {
        println!("frame {} ({:?}) at ({:.2}, {:.2})", f.index, f.provenance, f.pose.x, f.pose.y);
        let obs = &f.observation;
        for e in &obs.entities {
            let (u, v) = bbox_center(&e.bbox_px);
            let hit = obs
                .depth
                .depth_at(u, v)
                .and_then(|d| obs.camera.unproject(u, v, d).ok());
            print!("  {:<10} {:<36} box {:?} range {:.2} m", e.entity_id, e.label, e.bbox_norm, e.depth_m);
            match hit {
                Some(p) => println!("  center ray hits ({:.2}, {:.2}, {:.2})", p.x, p.y, p.z),
                None => println!(),
            }
        }
    }
}
