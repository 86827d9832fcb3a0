//! Deterministic SVG output: node-link drawings of layouts and stress
//! trajectory plots. Same input bytes in, same output bytes out: no
//! timestamps, no randomness, fixed float formatting.

/// Node-link drawing. Points are (x, y) layout coordinates (higher
/// dimensions are projected onto the first two upstream); `domain_radius`
/// draws the open-ball boundary of a negatively curved space.
pub fn layout_svg(
    ids: &[String],
    points: &[(f64, f64)],
    edges: &[(usize, usize)],
    domain_radius: Option<f64>,
) -> String {
    assert_eq!(ids.len(), points.len());

    let mut min_x = f64::INFINITY;
    let mut max_x = f64::NEG_INFINITY;
    let mut min_y = f64::INFINITY;
    let mut max_y = f64::NEG_INFINITY;
    for &(x, y) in points {
        min_x = min_x.min(x);
        max_x = max_x.max(x);
        min_y = min_y.min(-y);
        max_y = max_y.max(-y);
    }
    if let Some(r) = domain_radius {
        min_x = min_x.min(-r);
        max_x = max_x.max(r);
        min_y = min_y.min(-r);
        max_y = max_y.max(r);
    }
    if points.is_empty() && domain_radius.is_none() {
        min_x = -1.0;
        max_x = 1.0;
        min_y = -1.0;
        max_y = 1.0;
    }
    let extent = (max_x - min_x).max(max_y - min_y).max(1e-9);
    let margin = 0.05 * extent;
    let view_x = min_x - margin;
    let view_y = min_y - margin;
    let view_w = (max_x - min_x) + 2.0 * margin;
    let view_h = (max_y - min_y) + 2.0 * margin;

    let node_r = 0.02 * extent;
    let edge_w = 0.004 * extent;
    let font = 0.03 * extent;

    let mut out = String::new();
    out.push_str(&format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"800\" height=\"{:.0}\" \
         viewBox=\"{:.6} {:.6} {:.6} {:.6}\">\n",
        800.0 * view_h / view_w,
        view_x,
        view_y,
        view_w,
        view_h
    ));
    if let Some(r) = domain_radius {
        out.push_str(&format!(
            "  <circle class=\"domain\" cx=\"0\" cy=\"0\" r=\"{:.6}\" fill=\"none\" \
             stroke=\"#999999\" stroke-width=\"{:.6}\" stroke-dasharray=\"{:.6}\"/>\n",
            r,
            edge_w,
            4.0 * edge_w
        ));
    }
    for &(a, b) in edges {
        let (x1, y1) = points[a];
        let (x2, y2) = points[b];
        out.push_str(&format!(
            "  <line x1=\"{:.6}\" y1=\"{:.6}\" x2=\"{:.6}\" y2=\"{:.6}\" \
             stroke=\"#444444\" stroke-width=\"{:.6}\"/>\n",
            x1, -y1, x2, -y2, edge_w
        ));
    }
    for (i, &(x, y)) in points.iter().enumerate() {
        out.push_str(&format!(
            "  <circle cx=\"{:.6}\" cy=\"{:.6}\" r=\"{:.6}\" fill=\"#1f77b4\"/>\n",
            x, -y, node_r
        ));
        out.push_str(&format!(
            "  <text x=\"{:.6}\" y=\"{:.6}\" font-size=\"{:.6}\" \
             font-family=\"sans-serif\" fill=\"#000000\">{}</text>\n",
            x + 1.2 * node_r,
            -y - 1.2 * node_r,
            font,
            escape(&ids[i])
        ));
    }
    out.push_str("</svg>\n");
    out
}

/// One polyline per run: normalized stress against iteration number,
/// colored per optimizer.
pub fn trajectories_svg(series: &[(String, u64, Vec<f64>)]) -> String {
    const W: f64 = 800.0;
    const H: f64 = 500.0;
    const L: f64 = 70.0;
    const R: f64 = 770.0;
    const T: f64 = 30.0;
    const B: f64 = 450.0;
    const PALETTE: [&str; 4] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd"];

    let max_len = series.iter().map(|(_, _, t)| t.len()).max().unwrap_or(1);
    let mut max_y = f64::MIN_POSITIVE;
    for (_, _, t) in series {
        for &v in t {
            max_y = max_y.max(v);
        }
    }

    let mut optimizers: Vec<&str> = Vec::new();
    for (name, _, _) in series {
        if !optimizers.contains(&name.as_str()) {
            optimizers.push(name);
        }
    }

    let x_of = |iter: usize| L + (R - L) * iter as f64 / max_len.max(1) as f64;
    let y_of = |v: f64| B - (B - T) * (v / max_y).clamp(0.0, 1.0);

    let mut out = String::new();
    out.push_str(&format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{W:.0}\" height=\"{H:.0}\" \
         viewBox=\"0 0 {W:.0} {H:.0}\">\n"
    ));
    out.push_str(&format!(
        "  <rect x=\"{L:.1}\" y=\"{T:.1}\" width=\"{:.1}\" height=\"{:.1}\" \
         fill=\"none\" stroke=\"#000000\"/>\n",
        R - L,
        B - T
    ));
    out.push_str(&format!(
        "  <text x=\"{:.1}\" y=\"{:.1}\" font-size=\"14\" font-family=\"sans-serif\">iteration</text>\n",
        (L + R) / 2.0 - 30.0,
        B + 35.0
    ));
    out.push_str(&format!(
        "  <text x=\"12\" y=\"{:.1}\" font-size=\"14\" font-family=\"sans-serif\" \
         transform=\"rotate(-90 12 {:.1})\">normalized stress</text>\n",
        (T + B) / 2.0,
        (T + B) / 2.0
    ));
    out.push_str(&format!(
        "  <text x=\"{:.1}\" y=\"{:.1}\" font-size=\"12\" font-family=\"sans-serif\">0</text>\n",
        L - 14.0,
        B + 4.0
    ));
    out.push_str(&format!(
        "  <text x=\"{:.1}\" y=\"{:.1}\" font-size=\"12\" font-family=\"sans-serif\">{:.3e}</text>\n",
        8.0,
        T + 4.0,
        max_y
    ));
    for (name, _seed, trajectory) in series {
        let color_idx = optimizers.iter().position(|o| o == name).unwrap_or(0);
        let color = PALETTE[color_idx % PALETTE.len()];
        let pts: Vec<String> = trajectory
            .iter()
            .enumerate()
            .map(|(i, &v)| format!("{:.2},{:.2}", x_of(i + 1), y_of(v)))
            .collect();
        out.push_str(&format!(
            "  <polyline points=\"{}\" fill=\"none\" stroke=\"{}\" stroke-width=\"1\" opacity=\"0.6\"/>\n",
            pts.join(" "),
            color
        ));
    }
    for (i, name) in optimizers.iter().enumerate() {
        let y = T + 18.0 * (i as f64 + 1.0);
        let color = PALETTE[i % PALETTE.len()];
        out.push_str(&format!(
            "  <rect x=\"{:.1}\" y=\"{:.1}\" width=\"12\" height=\"4\" fill=\"{}\"/>\n",
            R - 150.0,
            y - 4.0,
            color
        ));
        out.push_str(&format!(
            "  <text x=\"{:.1}\" y=\"{:.1}\" font-size=\"12\" font-family=\"sans-serif\">{}</text>\n",
            R - 132.0,
            y,
            escape(name)
        ));
    }
    out.push_str("</svg>\n");
    out
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}
