//! Per-step trajectory dumps: entity kinematics and rewards after each step.

use std::io::Write;

use sam_core::samac::Transition;
use sam_core::world::WorldState;

pub fn header(n_entities: usize) -> String {
    let mut cols = vec!["episode".to_string(), "step".to_string()];
    for i in 0..n_entities {
        for c in ["x", "y", "vx", "vy"] {
            cols.push(format!("{c}_{i}"));
        }
    }
    cols.extend((0..n_entities).map(|i| format!("reward_{i}")));
    cols.join(",")
}

/// Appends one row describing `state` (the state after the step) and the
/// step's rewards.
pub fn write_step<W: Write>(out: &mut W, episode: u64, tr: &Transition, state: &WorldState) -> std::io::Result<()> {
    write!(out, "{episode},{}", state.step)?;
    for (p, v) in state.positions.iter().zip(&state.velocities) {
        write!(out, ",{},{},{},{}", p[0], p[1], v[0], v[1])?;
    }
    for r in &tr.rewards {
        write!(out, ",{r}")?;
    }
    writeln!(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn header_layout() {
        assert_eq!(
            header(1),
            "episode,step,x_0,y_0,vx_0,vy_0,reward_0"
        );
    }
}
