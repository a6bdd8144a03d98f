//! Self-contained SVG log-log plots of fitted levels.

use std::fmt::Write;

use super::fit::ScalingFit;

const W: f64 = 640.0;
const H: f64 = 420.0;
const PAD: f64 = 64.0;

fn esc(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

/// Grid means (or variances) with bootstrap error bars and the fitted line.
/// `tag` is written into the metadata element, e.g. the config hash.
pub fn loglog_svg(fit: &ScalingFit, tag: &str) -> String {
    let lx: Vec<f64> = fit.lambdas.iter().map(|l| l.log10()).collect();
    let mut ys: Vec<f64> = fit.levels.iter().map(|v| v.log10()).collect();
    for (lo, hi) in &fit.level_ci {
        if *lo > 0.0 {
            ys.push(lo.log10());
        }
        ys.push(hi.log10());
    }
    let (x0, x1) = span(&lx);
    let (y0, y1) = span(&ys);
    let px = |x: f64| PAD + (x - x0) / (x1 - x0) * (W - 2.0 * PAD);
    let py = |y: f64| H - PAD - (y - y0) / (y1 - y0) * (H - 2.0 * PAD);

    let mut s = String::new();
    let _ = writeln!(s, r#"<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" viewBox="0 0 {W} {H}">"#);
    let _ = writeln!(s, "<metadata>{}</metadata>", esc(tag));
    let _ = writeln!(s, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let _ = writeln!(
        s,
        r#"<path d="M{a} {b} L{a} {c} L{d} {c}" stroke="black" fill="none"/>"#,
        a = PAD,
        b = PAD,
        c = H - PAD,
        d = W - PAD
    );
    for (i, (x, l)) in lx.iter().zip(&fit.lambdas).enumerate() {
        let (lo, hi) = fit.level_ci[i];
        let top = py(hi.log10());
        let bot = if lo > 0.0 { py(lo.log10()) } else { H - PAD };
        let _ = writeln!(s, r#"<line x1="{0:.2}" y1="{top:.2}" x2="{0:.2}" y2="{bot:.2}" stroke="gray"/>"#, px(*x));
        let _ = writeln!(
            s,
            r#"<circle cx="{:.2}" cy="{:.2}" r="3.5" fill="black"/>"#,
            px(*x),
            py(fit.levels[i].log10())
        );
        let _ = writeln!(
            s,
            r#"<text x="{:.2}" y="{:.2}" font-size="11" text-anchor="middle">{l}</text>"#,
            px(*x),
            H - PAD + 16.0
        );
    }
    let line = |x: f64| (fit.intercept + fit.slope * x * std::f64::consts::LN_10) / std::f64::consts::LN_10;
    let _ = writeln!(
        s,
        r#"<line x1="{:.2}" y1="{:.2}" x2="{:.2}" y2="{:.2}" stroke="firebrick" stroke-width="1.5"/>"#,
        px(x0),
        py(line(x0)),
        px(x1),
        py(line(x1))
    );
    let _ = writeln!(
        s,
        r#"<text x="{PAD}" y="{:.2}" font-size="13">{} {:?}: slope {:.4} [{:.4}, {:.4}], R² {:.4}</text>"#,
        PAD - 20.0,
        esc(&fit.statistic),
        fit.moment,
        fit.slope,
        fit.slope_ci.0,
        fit.slope_ci.1,
        fit.r_squared
    );
    let _ = writeln!(
        s,
        r#"<text x="{:.2}" y="{:.2}" font-size="12" text-anchor="middle">λ (log scale)</text>"#,
        W / 2.0,
        H - 18.0
    );
    s.push_str("</svg>\n");
    s
}

fn span(v: &[f64]) -> (f64, f64) {
    let lo = v.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = v.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let pad = if hi > lo { 0.05 * (hi - lo) } else { 0.5 };
    (lo - pad, hi + pad)
}
