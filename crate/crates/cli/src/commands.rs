use std::f64::consts::PI;
use std::path::Path;

use lorentz_coxeter::classify::classify;
use lorentz_coxeter::coxeter::{generate_roots_with, BfsOptions};
use lorentz_coxeter::gasket::{intrinsic_gasket, rank4_gasket_with, GasketScene};
use lorentz_coxeter::limits::{limit_set_sample_with, verify_limit_equality_with};
use lorentz_coxeter::projective::{diagonalizing_basis, limit_root_sample_with, TransverseSource};
use lorentz_coxeter::render::{
    render_svg, scene_from_gasket, scene_from_system, SceneOptions, Shape,
};
use lorentz_coxeter::{CoxeterDiagram, Error, GramMatrix, Result};
use serde_json::{json, Value};

use crate::{Command, GasketMode, Settings};

fn load(path: &Path) -> Result<GramMatrix> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::InvalidArgument(format!("cannot read {}: {e}", path.display())))?;
    let diagram: CoxeterDiagram = text.parse()?;
    diagram.gram()
}

/// Reports on stderr when the chart had to be found by search.
fn note_basis(g: &GramMatrix) -> Result<()> {
    if diagonalizing_basis(g)?.source == TransverseSource::Searched {
        eprintln!("note: -G⁻¹𝟙 is not time-like; using a searched transverse vector for the chart");
    }
    Ok(())
}

fn write_file(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text)
        .map_err(|e| Error::InvalidArgument(format!("cannot write {}: {e}", path.display())))
}

fn gasket_scene(
    mode: GasketMode,
    gen: usize,
    angles: &[f64],
    budget: usize,
) -> Result<GasketScene> {
    match mode {
        GasketMode::Rank4 => rank4_gasket_with(gen, budget),
        GasketMode::Intrinsic => {
            if angles.len() != 3 {
                return Err(Error::InvalidArgument(format!(
                    "--angles needs 3 values, got {}",
                    angles.len()
                )));
            }
            let p = |deg: f64| {
                let t = deg * PI / 180.0;
                [t.cos(), t.sin()]
            };
            intrinsic_gasket([p(angles[0]), p(angles[1]), p(angles[2])], gen, budget)
        }
    }
}

pub fn run(command: &Command, settings: &Settings) -> Result<Value> {
    let bfs = BfsOptions {
        budget: settings.budget,
        ..BfsOptions::default()
    };
    match command {
        Command::Classify { diagram, tol } => {
            let g = load(diagram)?;
            if !(*tol > 0.0) {
                return Err(Error::InvalidArgument("--tol must be positive".into()));
            }
            Ok(serde_json::to_value(classify(&g, *tol)).expect("output serializes"))
        }
        Command::Roots { diagram, max_depth } => {
            let g = load(diagram)?;
            let roots = generate_roots_with(&g, *max_depth, &bfs)?;
            let list: Vec<Value> = roots
                .iter()
                .map(|r| json!({ "depth": r.depth, "coords": r.vector.coords() }))
                .collect();
            Ok(json!({ "rank": g.rank(), "max_depth": max_depth, "roots": list }))
        }
        Command::Limits { diagram, window } => {
            let g = load(diagram)?;
            note_basis(&g)?;
            Ok(
                serde_json::to_value(limit_root_sample_with(&g, window[0], window[1], &bfs)?)
                    .expect("output serializes"),
            )
        }
        Command::Orbit { diagram, window } => {
            let g = load(diagram)?;
            note_basis(&g)?;
            Ok(
                serde_json::to_value(limit_set_sample_with(&g, window[0], window[1], &bfs)?)
                    .expect("output serializes"),
            )
        }
        Command::Verify {
            diagram,
            levels,
            eps,
        } => {
            let g = load(diagram)?;
            note_basis(&g)?;
            let levels: Vec<_> = levels.0.iter().map(|&w| (w, w)).collect();
            Ok(
                serde_json::to_value(verify_limit_equality_with(&g, &levels, *eps, &bfs)?)
                    .expect("output serializes"),
            )
        }
        Command::Gasket {
            mode,
            gen,
            out,
            angles,
            size,
        } => {
            let scene = gasket_scene(*mode, *gen, angles, settings.budget)?;
            if let Some(path) = out {
                write_file(path, &render_svg(&scene_from_gasket(&scene, *gen), *size)?)?;
            }
            Ok(scene.to_value())
        }
        Command::Render {
            diagram,
            window,
            out,
            k,
            hyperplanes,
            size,
        } => {
            let g = load(diagram)?;
            note_basis(&g)?;
            let options = SceneOptions {
                k_region: *k,
                hyperplanes: *hyperplanes,
            };
            let scene = scene_from_system(&g, *window, options, &bfs)?;
            write_file(out, &render_svg(&scene, *size)?)?;
            let roots = match scene.layer("roots").map(|l| &l.shape) {
                Some(Shape::Points(p)) => p.len(),
                _ => 0,
            };
            let layers: Vec<&str> = scene.layers.iter().map(|l| l.class).collect();
            Ok(json!({ "out": out.display().to_string(), "layers": layers, "roots": roots }))
        }
    }
}
