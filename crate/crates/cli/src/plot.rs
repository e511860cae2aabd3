//! Standalone SVG of the start of the spiral: the curve, the unit circle,
//! the points x_0..x_{n-1} and the circle of radius ε_k drawn around each
//! x_k, which cuts the curve at x_{k+1}.
//!
//! Geometry is written in data coordinates (y flipped by a group transform)
//! with 17 significant digits, so marker positions read back exactly.

use std::fmt::Write;

use altproj::numfmt::sig17;
use altproj::sequence;
use altproj::spiral::curve;
use altproj::Angle;

use crate::Failure;

pub const CURVE_SAMPLES: usize = 2000;
const HALF_EXTENT: f64 = 2.6;

pub fn render(n: usize) -> Result<String, Failure> {
    if n < 2 {
        return Err(Failure::Usage(format!("plot needs at least 2 points, got {n}")));
    }
    // one extra record so the curve runs to where the last circle cuts it
    let report = sequence::generate(n + 1)?;
    let recs = &report.records;
    let alpha_end = recs[n].alpha.radians();

    let mut s = String::new();
    let side = 2.0 * HALF_EXTENT;
    s.push_str("<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n");
    let _ = writeln!(
        s,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"800\" height=\"800\" viewBox=\"{} {} {} {}\">",
        -HALF_EXTENT, -HALF_EXTENT, side, side
    );
    let _ = writeln!(s, "<title>Spiral points x_0 to x_{} with construction circles</title>", n - 1);
    s.push_str("<rect x=\"-2.6\" y=\"-2.6\" width=\"5.2\" height=\"5.2\" fill=\"white\"/>\n");
    s.push_str("<g transform=\"scale(1,-1)\" fill=\"none\" stroke-width=\"0.006\">\n");
    s.push_str("<circle class=\"unit-circle\" cx=\"0\" cy=\"0\" r=\"1\" stroke=\"#888888\"/>\n");

    s.push_str("<polyline class=\"spiral\" stroke=\"#1f4e9c\" points=\"");
    for i in 0..CURVE_SAMPLES {
        let t = alpha_end * i as f64 / (CURVE_SAMPLES - 1) as f64;
        let p = curve(Angle::new(t).map_err(Failure::from)?);
        let c = p.coords();
        if i > 0 {
            s.push(' ');
        }
        let _ = write!(s, "{},{}", sig17(c[0]), sig17(c[1]));
    }
    s.push_str("\"/>\n");

    s.push_str("<g class=\"radii\" stroke=\"#c0392b\" stroke-opacity=\"0.6\">\n");
    for r in &recs[..n] {
        let c = r.x.coords();
        let _ = writeln!(
            s,
            "<circle data-n=\"{}\" cx=\"{}\" cy=\"{}\" r=\"{}\"/>",
            r.n,
            sig17(c[0]),
            sig17(c[1]),
            sig17(r.eps)
        );
    }
    s.push_str("</g>\n");

    s.push_str("<g class=\"markers\" fill=\"#000000\" stroke=\"none\">\n");
    for r in &recs[..n] {
        let c = r.x.coords();
        let _ = writeln!(
            s,
            "<circle class=\"marker\" data-n=\"{}\" cx=\"{}\" cy=\"{}\" r=\"0.025\"/>",
            r.n,
            sig17(c[0]),
            sig17(c[1])
        );
    }
    s.push_str("</g>\n</g>\n</svg>\n");
    Ok(s)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn deterministic_and_sized() {
        let a = render(16).unwrap();
        assert_eq!(a, render(16).unwrap());
        assert_eq!(a.matches("class=\"marker\"").count(), 16);
        assert!(a.contains("cx=\"2.0000000000000000e0\" cy=\"0.0000000000000000e0\""));
    }

    #[test]
    fn smallest_plot() {
        let s = render(2).unwrap();
        assert_eq!(s.matches("class=\"marker\"").count(), 2);
        assert!(render(1).is_err());
    }
}
