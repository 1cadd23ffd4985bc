//! SVG rendering of lozenge tilings with analytic overlays.
//!
//! The tiling is drawn from the cube-stack surface: each cell `(i, j)`
//! contributes its visible top face (a horizontal lozenge) plus the side
//! faces exposed against its neighbors, projected by
//! `(i, j, z) -> (j - i, z - (i + j)/2)`. In these render coordinates the
//! horizontal-lozenge center of particle `(t, h)` of the lattice sits at
//! `(t, h - 1)`, which is how overlay data (turning heights, the frozen
//! boundary) are mapped onto the picture.

use std::fmt::Write as _;

use crate::asymptotics::{frozen_boundary_k2, LimitSpec};
use crate::error::Error;
use crate::lattice::{PlanePartition, Window};
use crate::weights::WeightSpec;
use crate::Result;

/// Hard cap on the number of tiles a window may request.
pub const MAX_TILES: u64 = 1_000_000;

const COLOR_TOP: &str = "#e8c468";
const COLOR_LEFT: &str = "#7da7d9";
const COLOR_RIGHT: &str = "#c96a6a";
const SCALE: f64 = 12.0;

/// Optional analytic overlays drawn on top of the tiling.
#[derive(Debug, Clone, Default)]
pub struct Overlays {
    /// Turning points `(V, chi_j)` of a limit spec, scaled by `1/r`.
    pub turning: Option<(LimitSpec, f64)>,
    /// The k = 2 frozen boundary `chi_+-(tau)` for `alpha`, scaled by `1/r`.
    pub frozen_k2: Option<(f64, f64)>,
    /// Facet band boundaries (heights `chi_j / r` at the right edge).
    pub facet_bands: bool,
}

struct SvgCanvas {
    body: String,
    t_min: f64,
    t_max: f64,
    h_min: f64,
    h_max: f64,
}

impl SvgCanvas {
    fn new(w: &Window) -> Self {
        SvgCanvas {
            body: String::new(),
            t_min: w.t_min as f64 - 1.5,
            t_max: w.t_max as f64 + 1.5,
            h_min: w.h_min - 2.5,
            h_max: w.h_max + 1.5,
        }
    }

    fn x(&self, t: f64) -> f64 {
        (t - self.t_min) * SCALE
    }

    fn y(&self, h: f64) -> f64 {
        (self.h_max - h) * SCALE
    }

    fn poly(&mut self, pts: &[(f64, f64)], fill: &str) {
        let mut s = String::new();
        for (t, h) in pts {
            let _ = write!(s, "{:.2},{:.2} ", self.x(*t), self.y(*h));
        }
        let _ = writeln!(
            self.body,
            "<polygon points=\"{}\" fill=\"{}\" stroke=\"#404040\" stroke-width=\"0.4\"/>",
            s.trim_end(),
            fill
        );
    }

    fn circle(&mut self, t: f64, h: f64, color: &str) {
        let _ = writeln!(
            self.body,
            "<circle cx=\"{:.2}\" cy=\"{:.2}\" r=\"{:.1}\" fill=\"{}\" stroke=\"black\"/>",
            self.x(t),
            self.y(h),
            0.45 * SCALE,
            color
        );
    }

    fn polyline(&mut self, pts: &[(f64, f64)], color: &str) {
        let mut s = String::new();
        for (t, h) in pts {
            let _ = write!(s, "{:.2},{:.2} ", self.x(*t), self.y(*h));
        }
        let _ = writeln!(
            self.body,
            "<polyline points=\"{}\" fill=\"none\" stroke=\"{}\" stroke-width=\"1.2\"/>",
            s.trim_end(),
            color
        );
    }

    fn finish(self, comment: &str) -> String {
        let width = (self.t_max - self.t_min) * SCALE;
        let height = (self.h_max - self.h_min) * SCALE;
        format!(
            "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n<!-- {} -->\n<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{:.0}\" height=\"{:.0}\" viewBox=\"0 0 {:.2} {:.2}\">\n<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n{}</svg>\n",
            comment, width, height, width, height, self.body
        )
    }
}

/// Projection of a cube corner `(i, j, z)` to render coordinates.
fn project(i: f64, j: f64, z: f64) -> (f64, f64) {
    (j - i, z - 0.5 * (i + j))
}

/// Renders the tiling of `pp` over the window (given in lattice
/// coordinates), with optional overlays, to an SVG document.
pub fn render_tiling(pp: &PlanePartition, window: &Window, overlays: &Overlays) -> Result<String> {
    let t_span = (window.t_max - window.t_min + 3).max(1) as u64;
    let h_span = (window.h_max - window.h_min + 4.0).max(1.0) as u64;
    let tiles = t_span * h_span * 2;
    if tiles > MAX_TILES {
        return Err(Error::WindowTooLarge {
            tiles,
            limit: MAX_TILES,
        });
    }
    // Cell ranges whose faces can intersect the window: |t| <= span bound,
    // and depth bounded by the window floor.
    let mut canvas = SvgCanvas::new(window);
    let depth = (window.h_max - window.h_min + 4.0).ceil() as i64;
    let t_lo = window.t_min - 1;
    let t_hi = window.t_max + 1;
    // visible faces per cell, drawn back-to-front (increasing i + j)
    let i_max = ((-t_lo).max(0) + depth + 2) as usize;
    let j_max = (t_hi.max(0) + depth + 2) as usize;
    let in_window = |t: f64, h: f64| {
        t >= window.t_min as f64 - 1.0
            && t <= window.t_max as f64 + 1.0
            && h >= window.h_min - 2.0
            && h <= window.h_max + 1.0
    };
    for s in 2..=(i_max + j_max) {
        for i in 1..=i_max.min(s - 1) {
            let j = s - i;
            if j < 1 || j > j_max {
                continue;
            }
            let (fi, fj) = (i as f64, j as f64);
            let v = pp.entry(i, j) as f64;
            let (tc, hc) = project(fi + 0.5, fj + 0.5, v);
            if in_window(tc, hc) {
                // top face
                canvas.poly(
                    &[
                        project(fi, fj, v),
                        project(fi + 1.0, fj, v),
                        project(fi + 1.0, fj + 1.0, v),
                        project(fi, fj + 1.0, v),
                    ],
                    COLOR_TOP,
                );
            }
            // side face toward increasing i (seen on the left of the picture)
            let vi = pp.entry(i + 1, j) as f64;
            for z in (vi as i64)..(v as i64) {
                let (tc, hc) = project(fi + 1.0, fj + 0.5, z as f64 + 0.5);
                if !in_window(tc, hc) {
                    continue;
                }
                let zf = z as f64;
                canvas.poly(
                    &[
                        project(fi + 1.0, fj, zf),
                        project(fi + 1.0, fj + 1.0, zf),
                        project(fi + 1.0, fj + 1.0, zf + 1.0),
                        project(fi + 1.0, fj, zf + 1.0),
                    ],
                    COLOR_LEFT,
                );
            }
            // side face toward increasing j
            let vj = pp.entry(i, j + 1) as f64;
            for z in (vj as i64)..(v as i64) {
                let (tc, hc) = project(fi + 0.5, fj + 1.0, z as f64 + 0.5);
                if !in_window(tc, hc) {
                    continue;
                }
                let zf = z as f64;
                canvas.poly(
                    &[
                        project(fi, fj + 1.0, zf),
                        project(fi + 1.0, fj + 1.0, zf),
                        project(fi + 1.0, fj + 1.0, zf + 1.0),
                        project(fi, fj + 1.0, zf + 1.0),
                    ],
                    COLOR_RIGHT,
                );
            }
        }
    }

    // Overlays live in lattice coordinates; particles map to h - 1.
    if let Some((l, r)) = &overlays.turning {
        let tps = crate::asymptotics::turning_points(l);
        let t_edge = l.v() / r;
        for tp in &tps {
            canvas.circle(t_edge, tp.chi / r - 1.0, "#222222");
            if overlays.facet_bands {
                let pts: Vec<(f64, f64)> = (0..=40)
                    .map(|s| {
                        let t = t_edge - 8.0 + 8.0 * s as f64 / 40.0;
                        (t, tp.chi / r - 1.0)
                    })
                    .collect();
                canvas.polyline(&pts, "#555555");
            }
        }
    }
    if let Some((alpha, r)) = overlays.frozen_k2 {
        for branch_minus in [true, false] {
            let mut pts = Vec::new();
            for s in -120..=120 {
                let tau = 3.0 * s as f64 / 120.0;
                if tau == 0.0 && !branch_minus {
                    continue;
                }
                if let Ok(fb) = frozen_boundary_k2(alpha, tau) {
                    let chi = if branch_minus { fb.chi_minus } else { fb.chi_plus };
                    if chi.is_finite() {
                        pts.push((tau / r, chi / r - 1.0));
                    }
                }
            }
            canvas.polyline(&pts, "#2a6f2a");
        }
    }
    Ok(canvas.finish("perioloz tiling"))
}

/// Renders with a reproducibility stamp in the leading comment.
pub fn render_tiling_stamped(
    pp: &PlanePartition,
    window: &Window,
    overlays: &Overlays,
    stamp: &str,
) -> Result<String> {
    let svg = render_tiling(pp, window, overlays)?;
    Ok(svg.replacen("perioloz tiling", &format!("perioloz tiling | {stamp}"), 1))
}

/// Spec-level convenience: sample-ready overlay bundle for a weight spec.
pub fn overlays_for(spec: &WeightSpec, with_turning: bool, with_frozen_k2: bool) -> Overlays {
    let mut o = Overlays::default();
    if with_turning {
        o.turning = Some((spec.limit(), spec.r()));
        o.facet_bands = true;
    }
    if with_frozen_k2 && spec.k() == 2 {
        let alpha = spec.alphas()[0].max(spec.alphas()[1]);
        if alpha > 1.0 {
            o.frozen_k2 = Some((alpha, spec.r()));
        }
    }
    o
}
