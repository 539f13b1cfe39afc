//! CSV and SVG writers. All quantitative output goes to CSV; the SVG
//! rendering is a minimal static picture (axes, polylines, points) for a
//! quick look at curves and phase portraits.
//!
//! Floats are written with Rust's shortest round-trip formatting, so
//! identical inputs produce byte-identical files.

use std::io::{self, Write};

use crate::direction::CrossingData;
use crate::hopf2::DoubleHopfPoint;
use crate::poincare::PoincareResult;
use crate::simulate::Trajectory;
use crate::switching::{CurveSegment, EndpointTag, Link, Window};
use crate::unfolding::SemiLine;

/// One row per curve sample.
pub fn write_curves_csv<W: Write>(mut w: W, segments: &[CurveSegment]) -> io::Result<()> {
    writeln!(w, "n,j,sign,j1,j2,omega,tau1,tau2")?;
    for seg in segments {
        for s in &seg.samples {
            writeln!(
                w,
                "{},{},{},{},{},{},{},{}",
                seg.n,
                seg.j,
                seg.branch.label(),
                seg.j1,
                seg.j2,
                s.omega,
                s.tau1,
                s.tau2
            )?;
        }
    }
    Ok(())
}

/// Curve samples with the crossing-direction annotations appended.
pub fn write_directions_csv<W: Write>(
    mut w: W,
    rows: &[(&CurveSegment, Vec<(f64, f64, f64, Option<CrossingData>)>)],
) -> io::Result<()> {
    writeln!(w, "n,j,sign,j1,j2,omega,tau1,tau2,delta,gains_on_right")?;
    for (seg, samples) in rows {
        for (omega, tau1, tau2, cd) in samples {
            match cd {
                Some(cd) => writeln!(
                    w,
                    "{},{},{},{},{},{},{},{},{},{}",
                    seg.n,
                    seg.j,
                    seg.branch.label(),
                    seg.j1,
                    seg.j2,
                    omega,
                    tau1,
                    tau2,
                    cd.delta,
                    cd.two_more_on_right
                )?,
                None => writeln!(
                    w,
                    "{},{},{},{},{},{},{},{},,",
                    seg.n,
                    seg.j,
                    seg.branch.label(),
                    seg.j1,
                    seg.j2,
                    omega,
                    tau1,
                    tau2
                )?,
            }
        }
    }
    Ok(())
}

/// Segment-endpoint links, identifying segments by their index keys.
pub fn write_connectivity_csv<W: Write>(
    mut w: W,
    segments: &[CurveSegment],
    links: &[Link],
) -> io::Result<()> {
    writeln!(
        w,
        "n,j,endpoint,sign_a,j1_a,j2_a,sign_b,j1_b,j2_b,tau1,tau2"
    )?;
    for link in links {
        let (a, b) = (&segments[link.seg_a], &segments[link.seg_b]);
        let at = match link.endpoint {
            EndpointTag::A => a.first(),
            EndpointTag::B => a.last(),
        };
        writeln!(
            w,
            "{},{},{},{},{},{},{},{},{},{},{}",
            a.n,
            a.j,
            match link.endpoint {
                EndpointTag::A => "a",
                EndpointTag::B => "b",
            },
            a.branch.label(),
            a.j1,
            a.j2,
            b.branch.label(),
            b.j1,
            b.j2,
            at.tau1,
            at.tau2
        )?;
    }
    Ok(())
}

/// Double Hopf candidates.
pub fn write_hh_csv<W: Write>(mut w: W, points: &[DoubleHopfPoint]) -> io::Result<()> {
    writeln!(
        w,
        "tau1,tau2,omega1,omega2,n1,n2,resonance_flag,refined,residual1,residual2"
    )?;
    for p in points {
        writeln!(
            w,
            "{},{},{},{},{},{},{},{},{:e},{:e}",
            p.tau1,
            p.tau2,
            p.omega1,
            p.omega2,
            p.n1,
            p.n2,
            p.resonance.label(),
            p.refined,
            p.residual1,
            p.residual2
        )?;
    }
    Ok(())
}

/// Bifurcation semi-lines around a double Hopf point.
pub fn write_semilines_csv<W: Write>(mut w: W, lines: &[SemiLine]) -> io::Result<()> {
    writeln!(
        w,
        "label,tau1,tau2,dir_tau1,dir_tau2,reciprocal_slope,side,note"
    )?;
    for l in lines {
        let note = if l.label == "L4" {
            "linear part only; higher-order correction dropped"
        } else {
            ""
        };
        writeln!(
            w,
            "{},{},{},{},{},{},{:?},{}",
            l.label,
            l.point.0,
            l.point.1,
            l.direction.0,
            l.direction.1,
            l.reciprocal_slope,
            l.side,
            note
        )?;
    }
    Ok(())
}

/// Node-0 channels of a recorded trajectory.
pub fn write_trajectory_csv<W: Write>(mut w: W, traj: &Trajectory) -> io::Result<()> {
    writeln!(w, "t,u0,v0,u0_lag")?;
    for i in 0..traj.t.len() {
        writeln!(
            w,
            "{},{},{},{}",
            traj.t[i], traj.u0[i], traj.v0[i], traj.u0_lag[i]
        )?;
    }
    Ok(())
}

/// Section hits.
pub fn write_poincare_csv<W: Write>(mut w: W, pr: &PoincareResult) -> io::Result<()> {
    writeln!(w, "section,t,u0,u0_lag")?;
    for (t, p) in pr.times.iter().zip(&pr.points) {
        writeln!(w, "{},{},{},{}", pr.section.label(), t, p.0, p.1)?;
    }
    Ok(())
}

const SVG_W: f64 = 800.0;
const SVG_H: f64 = 600.0;
const MARGIN: f64 = 50.0;

const PALETTE: [&str; 6] = [
    "#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b",
];

struct Frame {
    x0: f64,
    x1: f64,
    y0: f64,
    y1: f64,
}

impl Frame {
    fn map(&self, x: f64, y: f64) -> (f64, f64) {
        let px = MARGIN + (x - self.x0) / (self.x1 - self.x0) * (SVG_W - 2.0 * MARGIN);
        let py = SVG_H - MARGIN - (y - self.y0) / (self.y1 - self.y0) * (SVG_H - 2.0 * MARGIN);
        (px, py)
    }
}

fn svg_header<W: Write>(w: &mut W, frame: &Frame, xlabel: &str, ylabel: &str) -> io::Result<()> {
    writeln!(
        w,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{SVG_W}" height="{SVG_H}" viewBox="0 0 {SVG_W} {SVG_H}">"#
    )?;
    writeln!(
        w,
        r#"<rect width="{SVG_W}" height="{SVG_H}" fill="white"/>"#
    )?;
    let (ox, oy) = frame.map(frame.x0, frame.y0);
    let (xe, _) = frame.map(frame.x1, frame.y0);
    let (_, ye) = frame.map(frame.x0, frame.y1);
    writeln!(
        w,
        r#"<line x1="{ox}" y1="{oy}" x2="{xe}" y2="{oy}" stroke="black"/>"#
    )?;
    writeln!(
        w,
        r#"<line x1="{ox}" y1="{oy}" x2="{ox}" y2="{ye}" stroke="black"/>"#
    )?;
    writeln!(
        w,
        r#"<text x="{}" y="{}" font-size="14">{}</text>"#,
        0.5 * SVG_W,
        SVG_H - 12.0,
        xlabel
    )?;
    writeln!(
        w,
        r#"<text x="14" y="{}" font-size="14" transform="rotate(-90 14 {})">{}</text>"#,
        0.5 * SVG_H,
        0.5 * SVG_H,
        ylabel
    )?;
    // corner tick labels
    writeln!(
        w,
        r#"<text x="{ox}" y="{}" font-size="11">{}</text>"#,
        oy + 16.0,
        frame.x0
    )?;
    writeln!(
        w,
        r#"<text x="{}" y="{}" font-size="11">{}</text>"#,
        xe - 24.0,
        oy + 16.0,
        frame.x1
    )?;
    writeln!(
        w,
        r#"<text x="{}" y="{ye}" font-size="11">{}</text>"#,
        ox - 34.0,
        frame.y1
    )?;
    Ok(())
}

fn polyline<W: Write>(
    w: &mut W,
    frame: &Frame,
    xs: impl Iterator<Item = (f64, f64)>,
    color: &str,
) -> io::Result<()> {
    let mut points = String::new();
    for (x, y) in xs {
        if x < frame.x0 || x > frame.x1 || y < frame.y0 || y > frame.y1 {
            continue;
        }
        let (px, py) = frame.map(x, y);
        points.push_str(&format!("{px:.2},{py:.2} "));
    }
    if points.is_empty() {
        return Ok(());
    }
    writeln!(
        w,
        r#"<polyline points="{}" fill="none" stroke="{color}" stroke-width="1"/>"#,
        points.trim_end()
    )
}

/// Switching-curve overlay in the delay plane, one color per mode.
pub fn write_curves_svg<W: Write>(
    mut w: W,
    per_mode: &[(u32, &[CurveSegment])],
    window: Window,
) -> io::Result<()> {
    let frame = Frame {
        x0: 0.0,
        x1: window.tau1_max,
        y0: 0.0,
        y1: window.tau2_max,
    };
    svg_header(&mut w, &frame, "tau1", "tau2")?;
    for (n, segs) in per_mode {
        let color = PALETTE[*n as usize % PALETTE.len()];
        for seg in *segs {
            polyline(
                &mut w,
                &frame,
                seg.samples.iter().map(|s| (s.tau1, s.tau2)),
                color,
            )?;
        }
    }
    writeln!(w, "</svg>")
}

/// Phase portrait `(u0, v0)` with Poincare hits overlaid in
/// `(u0, u0_lag)` coordinates when supplied.
pub fn write_phase_svg<W: Write>(
    mut w: W,
    traj: &Trajectory,
    hits: Option<&PoincareResult>,
) -> io::Result<()> {
    let min_max = |xs: &[f64]| {
        let lo = xs.iter().fold(f64::INFINITY, |a, &b| a.min(b));
        let hi = xs.iter().fold(f64::NEG_INFINITY, |a, &b| a.max(b));
        let pad = 0.05 * (hi - lo).max(1e-6);
        (lo - pad, hi + pad)
    };
    let (x0, x1) = min_max(&traj.u0);
    let (y0, y1) = min_max(&traj.v0);
    let frame = Frame { x0, x1, y0, y1 };
    svg_header(&mut w, &frame, "u(0,t)", "v(0,t)")?;
    polyline(
        &mut w,
        &frame,
        traj.u0.iter().zip(&traj.v0).map(|(&x, &y)| (x, y)),
        PALETTE[0],
    )?;
    if let Some(pr) = hits {
        for p in &pr.points {
            if p.0 < frame.x0 || p.0 > frame.x1 {
                continue;
            }
            // section hits are plotted against the lag channel; reuse the
            // vertical frame only when it contains them
            if p.1 >= frame.y0 && p.1 <= frame.y1 {
                let (px, py) = frame.map(p.0, p.1);
                writeln!(
                    w,
                    r#"<circle cx="{px:.2}" cy="{py:.2}" r="1.5" fill="{}"/>"#,
                    PALETTE[1]
                )?;
            }
        }
    }
    writeln!(w, "</svg>")
}
