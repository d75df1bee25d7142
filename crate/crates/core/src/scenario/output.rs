//! CSV writers for run results.
//!
//! Every file starts with a header naming each column and its unit. The
//! unit preset (`beta = rho = A0 = 1`) is dimensionless and is labelled `[-]`.

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::Path;

use crate::model::{from_riemann, pressure, to_riemann, VesselParams};

use super::RunOutput;

/// Numbers are written with a fixed 12-digit mantissa so that repeated
/// runs produce byte-identical files.
pub fn fmt_num(x: f64) -> String {
    format!("{x:.12e}")
}

fn is_dimensionless(vp: &VesselParams) -> bool {
    vp.beta == 1.0 && vp.density == 1.0 && vp.area0 == 1.0
}

/// `name [unit]` header cells, or `name [-]` for dimensionless runs.
fn header(columns: &[(&str, &str)], vp: &VesselParams) -> String {
    let dimensionless = is_dimensionless(vp);
    columns
        .iter()
        .map(|(name, unit)| {
            let unit = if dimensionless { "-" } else { unit };
            format!("{name} [{unit}]")
        })
        .collect::<Vec<_>>()
        .join(",")
}

fn row(values: &[f64]) -> String {
    values
        .iter()
        .map(|v| fmt_num(*v))
        .collect::<Vec<_>>()
        .join(",")
}

pub fn write_snapshots<W: Write>(w: &mut W, out: &RunOutput) -> io::Result<()> {
    let vp = &out.config.vessel;
    let cols = [
        ("t", "s"),
        ("x", "m"),
        ("A", "m^2"),
        ("V", "m/s"),
        ("P", "Pa"),
        ("u", "m/s"),
        ("v", "m/s"),
    ];
    writeln!(w, "{}", header(&cols, vp))?;
    for snap in &out.snapshots {
        for (i, x) in out.config.grid.centers().enumerate() {
            let s = snap.field.state(i);
            let p = pressure(s.area, vp).unwrap_or(f64::NAN);
            let r = to_riemann(&s, vp);
            writeln!(w, "{}", row(&[snap.t, x, s.area, s.velocity, p, r.u, r.v]))?;
        }
    }
    Ok(())
}

pub fn write_sensor<W: Write>(w: &mut W, out: &RunOutput) -> io::Result<()> {
    let cols = [
        ("t", "s"),
        ("Q_in", "m^3/s"),
        ("y", "Pa"),
        ("A0_trace", "m^2"),
        ("V0_trace", "m/s"),
    ];
    writeln!(w, "{}", header(&cols, &out.config.vessel))?;
    for s in &out.sensor {
        let r = &s.reading;
        writeln!(w, "{}", row(&[s.t, s.q_in, r.pressure, r.area, r.velocity]))?;
    }
    Ok(())
}

/// Outlet boundary trace; `X` and `G` are empty where the outlet has none.
pub fn write_boundary<W: Write>(w: &mut W, out: &RunOutput) -> io::Result<()> {
    let cols = [
        ("t", "s"),
        ("u_D", "m/s"),
        ("v_D", "m/s"),
        ("X", "m/s"),
        ("G", "Pa"),
    ];
    writeln!(w, "{}", header(&cols, &out.config.vessel))?;
    let opt = |x: Option<f64>| x.map(fmt_num).unwrap_or_default();
    for b in &out.boundary {
        let o = &b.trace.outlet;
        writeln!(
            w,
            "{},{},{}",
            row(&[b.t, o.u, o.v]),
            opt(b.trace.x),
            opt(b.trace.residual)
        )?;
    }
    Ok(())
}

pub fn write_diagnostics<W: Write>(w: &mut W, out: &RunOutput) -> io::Result<()> {
    let cols = [
        ("t", "s"),
        ("dt", "s"),
        ("mass_residual", "-"),
        ("min_lambda2", "m/s"),
    ];
    writeln!(w, "{}", header(&cols, &out.config.vessel))?;
    for d in &out.diagnostics {
        writeln!(w, "{}", row(&[d.t, d.dt, d.mass_residual, d.min_lambda2]))?;
    }
    Ok(())
}

pub const RUN_FILES: [&str; 4] = [
    "snapshots.csv",
    "sensor.csv",
    "boundary.csv",
    "diagnostics.csv",
];

/// Writes the four run files into `dir`, creating it if needed.
pub fn write_run(dir: &Path, out: &RunOutput) -> io::Result<()> {
    std::fs::create_dir_all(dir)?;
    type Writer = fn(&mut BufWriter<File>, &RunOutput) -> io::Result<()>;
    let writers: [Writer; 4] = [
        write_snapshots,
        write_sensor,
        write_boundary,
        write_diagnostics,
    ];
    for (name, write) in RUN_FILES.iter().zip(writers) {
        let mut f = BufWriter::new(File::create(dir.join(name))?);
        write(&mut f, out)?;
        f.flush()?;
    }
    Ok(())
}

/// Outlet velocity `V_D` at each recorded time.
pub fn outlet_velocity(out: &RunOutput) -> Vec<f64> {
    out.boundary
        .iter()
        .map(|b| from_riemann(&b.trace.outlet, &out.config.vessel).map_or(f64::NAN, |s| s.velocity))
        .collect()
}
