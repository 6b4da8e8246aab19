//! Data series behind each figure.

use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::Serialize;

use crate::boundary::{solve_sequence, SolveResult};
use crate::error::Result;
use crate::experiments::config::Numerics;
use crate::experiments::output::{boundary_table, curve_nodes, fmt_float, prepare, run_row, write_json, DerivedRecord, Table, BOUNDARY_COLUMNS, RUN_COLUMNS};
use crate::experiments::presets::{Figure, Plot};
use crate::model::ModelParams;

#[derive(Serialize)]
struct FigureManifest<'a> {
    figure: u8,
    title: &'a str,
    numerics: &'a Numerics,
    runs: Vec<RunManifest<'a>>,
    files: Vec<String>,
}

#[derive(Serialize)]
struct RunManifest<'a> {
    run_id: &'a str,
    params: &'a ModelParams,
    derived: DerivedRecord,
}

fn value_bounds(res: &SolveResult, stride: usize) -> Table {
    let k = res.derived.k;
    let mut t = Table::new(&["pi", "V_1", "F_1", "lower", "upper"]);
    let l = res.level(1);
    for i in curve_nodes(res.grid.len(), stride) {
        let x = res.grid.node(i);
        t.push(vec![
            fmt_float(x),
            fmt_float(l.v_n.values()[i]),
            fmt_float(l.f_n.values()[i]),
            fmt_float((x - k).max(0.0)),
            fmt_float((1.0 - k) * x),
        ]);
    }
    t
}

fn wide_curves(res: &SolveResult, levels: usize, stride: usize) -> Table {
    let mut header = vec!["pi".to_string()];
    for n in 1..=levels {
        header.extend([format!("V_{n}"), format!("F_{n}"), format!("g_{n}")]);
    }
    let mut t = Table::new(&header);
    for i in curve_nodes(res.grid.len(), stride) {
        let mut row = vec![fmt_float(res.grid.node(i))];
        for l in &res.levels[..levels] {
            row.extend([l.v_n.values()[i], l.f_n.values()[i], l.g_n.values()[i]].map(fmt_float));
        }
        t.push(row);
    }
    t
}

/// Solves every run of `fig` and writes `fig<k>_*.csv` plus `fig<k>_manifest.json` into `dir`.
pub fn write_figure(fig: &Figure, num: &Numerics, dir: &Path) -> Result<Vec<PathBuf>> {
    let solved: Vec<SolveResult> =
        fig.runs.par_iter().map(|r| solve_sequence(&r.params, num.grid, &num.pde)).collect::<Result<_>>()?;
    let stem = format!("fig{}", fig.number);
    let mut files = Vec::new();
    let mut emit = |name: String, table: Table| -> Result<()> {
        let path = prepare(dir, &name)?;
        table.write(&path)?;
        files.push(path);
        Ok(())
    };

    let mut runs = Table::new(&RUN_COLUMNS);
    for (r, res) in fig.runs.iter().zip(&solved) {
        runs.push(run_row(&r.id, &r.params, &res.derived, res.b1_closed_form));
    }
    emit(format!("{stem}_runs.csv"), runs)?;

    match fig.plot {
        Plot::ValueBounds => emit(format!("{stem}_curves.csv"), value_bounds(&solved[0], num.curve_stride))?,
        Plot::Curves { levels } => {
            let res = &solved[0];
            emit(format!("{stem}_curves.csv"), wide_curves(res, levels, num.curve_stride))?;
            let mut b = boundary_table(&fig.runs[0].id, res);
            b.rows.truncate(levels);
            emit(format!("{stem}_boundaries.csv"), b)?;
        }
        Plot::Boundaries => {
            let mut all = Table::new(&BOUNDARY_COLUMNS);
            for (r, res) in fig.runs.iter().zip(&solved) {
                all.extend(boundary_table(&r.id, res));
            }
            emit(format!("{stem}_boundaries.csv"), all)?;
        }
    }

    let manifest = FigureManifest {
        figure: fig.number,
        title: fig.title,
        numerics: num,
        runs: fig
            .runs
            .iter()
            .zip(&solved)
            .map(|(r, res)| RunManifest {
                run_id: &r.id,
                params: &r.params,
                derived: DerivedRecord::new(&r.params, &res.derived, res.b1_closed_form),
            })
            .collect(),
        files: files.iter().map(|p| p.file_name().unwrap().to_string_lossy().into_owned()).collect(),
    };
    let path = prepare(dir, &format!("{stem}_manifest.json"))?;
    write_json(&path, &manifest)?;
    files.push(path);
    Ok(files)
}
