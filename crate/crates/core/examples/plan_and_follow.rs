//! Plan an A* path across a scene and drive it with the path follower.

use owmm_bench::planner::{follow_path, plan_path, FollowParams, ReachModel};
use owmm_bench::sim::{main_cell_centers, BasePose, RobotState};
use owmm_bench::world::{generate_scene, SceneParams};

fn main() {
    let scene = generate_scene(3, &SceneParams::default()).expect("scene");
    let cells = main_cell_centers(&scene);
    let (start, goal) = (cells[0], cells[cells.len() - 1]);
    let path = plan_path(&scene, start, goal, &ReachModel::default()).expect("path");
    println!(
        "{} waypoints, length {:.2} m, grid cost {:.2} m",
        path.waypoints.len(),
        path.total_length,
        path.grid_cost
    );

    let robot = RobotState::at(BasePose::new(start[0], start[1], 0.0));
    let run = follow_path(&robot, &scene, &path, 0.1, &FollowParams::default(), 5000).expect("follow");
    let end = run.state.base;
    println!(
        "arrived at ({:.2}, {:.2}) after {} control steps, {:.3} m from the goal",
        end.x,
        end.y,
        run.actions.len(),
        end.distance_xy(goal[0], goal[1])
    );
}
