//! SVG scatter plots of 2D scores over the trained regions.
//!
//! Regions are rasterized on a fixed grid over the padded bounding box of
//! all points and centroids: every cell takes the label of the centroid
//! nearest to its centre. Region fills are drawn as horizontal runs of equal
//! cells and the borders as polylines along cell edges where neighbouring
//! cells disagree.

use std::fmt::Write as _;

use taptest_core::RegionModel;

use crate::error::{Error, Result};

pub const GRID: usize = 200;
const PAD: f64 = 0.10;
const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 520.0;
const MARGIN_L: f64 = 70.0;
const MARGIN_R: f64 = 150.0;
const MARGIN_T: f64 = 30.0;
const MARGIN_B: f64 = 60.0;

const PALETTE: [&str; 10] = [
    "#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf",
];

/// Points of one label.
#[derive(Debug, Clone, PartialEq)]
pub struct Series {
    pub label: String,
    pub points: Vec<[f64; 2]>,
    /// Hollow markers, e.g. for test data drawn over training data.
    pub hollow: bool,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Bounds {
    pub x_min: f64,
    pub x_max: f64,
    pub y_min: f64,
    pub y_max: f64,
}

impl Bounds {
    /// Box around `points`, padded by 10% per side.
    pub fn around(points: impl IntoIterator<Item = [f64; 2]>) -> Option<Bounds> {
        let mut it = points.into_iter().peekable();
        let first = *it.peek()?;
        let mut b = Bounds { x_min: first[0], x_max: first[0], y_min: first[1], y_max: first[1] };
        for [x, y] in it {
            b.x_min = b.x_min.min(x);
            b.x_max = b.x_max.max(x);
            b.y_min = b.y_min.min(y);
            b.y_max = b.y_max.max(y);
        }
        let dx = (b.x_max - b.x_min).max(1e-9);
        let dy = (b.y_max - b.y_min).max(1e-9);
        Some(Bounds {
            x_min: b.x_min - PAD * dx,
            x_max: b.x_max + PAD * dx,
            y_min: b.y_min - PAD * dy,
            y_max: b.y_max + PAD * dy,
        })
    }
}

/// Nearest-centroid cluster index for each cell; row 0 is the lowest `y`.
#[derive(Debug, Clone, PartialEq)]
pub struct RegionGrid {
    pub bounds: Bounds,
    pub size: usize,
    cells: Vec<usize>,
}

impl RegionGrid {
    pub fn new(regions: &RegionModel, bounds: Bounds, size: usize) -> Self {
        let mut cells = Vec::with_capacity(size * size);
        let grid = RegionGrid { bounds, size, cells: Vec::new() };
        for row in 0..size {
            for col in 0..size {
                cells.push(regions.nearest(&grid.cell_center(col, row)));
            }
        }
        RegionGrid { cells, ..grid }
    }

    pub fn cell_center(&self, col: usize, row: usize) -> [f64; 2] {
        let b = &self.bounds;
        let fx = (col as f64 + 0.5) / self.size as f64;
        let fy = (row as f64 + 0.5) / self.size as f64;
        [b.x_min + fx * (b.x_max - b.x_min), b.y_min + fy * (b.y_max - b.y_min)]
    }

    pub fn cluster_at(&self, col: usize, row: usize) -> usize {
        self.cells[row * self.size + col]
    }

    /// Cell containing `p`, clamped to the grid.
    pub fn cell_of(&self, p: [f64; 2]) -> (usize, usize) {
        let b = &self.bounds;
        let clamp = |f: f64| ((f * self.size as f64).floor().max(0.0) as usize).min(self.size - 1);
        (clamp((p[0] - b.x_min) / (b.x_max - b.x_min)), clamp((p[1] - b.y_min) / (b.y_max - b.y_min)))
    }

    /// Border polylines in grid coordinates (cell-edge units), as vertical
    /// and horizontal runs of disagreeing neighbours.
    pub fn borders(&self) -> Vec<[(usize, usize); 2]> {
        let n = self.size;
        let mut out = Vec::new();
        // vertical edges between (col, row) and (col + 1, row)
        for col in 0..n.saturating_sub(1) {
            let mut start = None;
            for row in 0..=n {
                let differs = row < n && self.cluster_at(col, row) != self.cluster_at(col + 1, row);
                match (differs, start) {
                    (true, None) => start = Some(row),
                    (false, Some(s)) => {
                        out.push([(col + 1, s), (col + 1, row)]);
                        start = None;
                    }
                    _ => {}
                }
            }
        }
        // horizontal edges between (col, row) and (col, row + 1)
        for row in 0..n.saturating_sub(1) {
            let mut start = None;
            for col in 0..=n {
                let differs = col < n && self.cluster_at(col, row) != self.cluster_at(col, row + 1);
                match (differs, start) {
                    (true, None) => start = Some(col),
                    (false, Some(s)) => {
                        out.push([(s, row + 1), (col, row + 1)]);
                        start = None;
                    }
                    _ => {}
                }
            }
        }
        out
    }
}

fn color_for(labels: &[String], label: &str) -> &'static str {
    labels.iter().position(|l| l == label).map_or("#444444", |i| PALETTE[i % PALETTE.len()])
}

fn esc(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;").replace('"', "&quot;")
}

/// Renders the series over the trained regions. `axis_titles` label the x
/// and y axes.
pub fn render_svg(regions: &RegionModel, series: &[Series], axis_titles: [&str; 2]) -> Result<String> {
    if regions.c() != 2 {
        return Err(Error::Usage(format!("plots need 2D scores, model regions have c = {}", regions.c())));
    }
    let points = series.iter().flat_map(|s| s.points.iter().copied());
    let centroids = regions.centroids().row_iter().map(|r| [r[0], r[1]]);
    if series.iter().all(|s| s.points.is_empty()) {
        return Err(Error::Usage("nothing to plot: no score rows".into()));
    }
    let bounds = Bounds::around(points.chain(centroids)).expect("at least one point");
    let grid = RegionGrid::new(regions, bounds, GRID);

    // Legend and colours follow region labels first, then any extra labels.
    let mut labels: Vec<String> = regions.labels().to_vec();
    for s in series {
        if !labels.contains(&s.label) {
            labels.push(s.label.clone());
        }
    }

    let pw = WIDTH - MARGIN_L - MARGIN_R;
    let ph = HEIGHT - MARGIN_T - MARGIN_B;
    let sx = |x: f64| MARGIN_L + (x - bounds.x_min) / (bounds.x_max - bounds.x_min) * pw;
    let sy = |y: f64| MARGIN_T + ph - (y - bounds.y_min) / (bounds.y_max - bounds.y_min) * ph;
    let gx = |c: usize| MARGIN_L + c as f64 / GRID as f64 * pw;
    let gy = |r: usize| MARGIN_T + ph - r as f64 / GRID as f64 * ph;

    let mut svg = String::new();
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(svg, r#"<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>"#);

    let _ = writeln!(svg, r#"<g id="regions" fill-opacity="0.12" shape-rendering="crispEdges">"#);
    for row in 0..GRID {
        let mut col = 0;
        while col < GRID {
            let cluster = grid.cluster_at(col, row);
            let start = col;
            while col < GRID && grid.cluster_at(col, row) == cluster {
                col += 1;
            }
            let _ = writeln!(
                svg,
                r#"<rect x="{:.2}" y="{:.2}" width="{:.2}" height="{:.2}" fill="{}"/>"#,
                gx(start),
                gy(row + 1),
                gx(col) - gx(start),
                gy(row) - gy(row + 1),
                color_for(&labels, &regions.labels()[cluster])
            );
        }
    }
    let _ = writeln!(svg, "</g>");

    let _ = writeln!(svg, r##"<g id="borders" fill="none" stroke="#333333" stroke-width="1.2">"##);
    for [(c0, r0), (c1, r1)] in grid.borders() {
        let _ = writeln!(svg, r#"<polyline points="{:.2},{:.2} {:.2},{:.2}"/>"#, gx(c0), gy(r0), gx(c1), gy(r1));
    }
    let _ = writeln!(svg, "</g>");

    let _ = writeln!(
        svg,
        r##"<rect x="{MARGIN_L}" y="{MARGIN_T}" width="{pw}" height="{ph}" fill="none" stroke="#000000"/>"##
    );
    for i in 0..=4 {
        let f = i as f64 / 4.0;
        let xv = bounds.x_min + f * (bounds.x_max - bounds.x_min);
        let yv = bounds.y_min + f * (bounds.y_max - bounds.y_min);
        let _ = writeln!(
            svg,
            r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">{}</text>"#,
            sx(xv),
            MARGIN_T + ph + 16.0,
            tick(xv)
        );
        let _ = writeln!(
            svg,
            r#"<text x="{:.2}" y="{:.2}" text-anchor="end">{}</text>"#,
            MARGIN_L - 6.0,
            sy(yv) + 4.0,
            tick(yv)
        );
    }
    let _ = writeln!(
        svg,
        r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">{}</text>"#,
        MARGIN_L + pw / 2.0,
        HEIGHT - 18.0,
        esc(axis_titles[0])
    );
    let _ = writeln!(
        svg,
        r#"<text x="18" y="{:.2}" text-anchor="middle" transform="rotate(-90 18 {:.2})">{}</text>"#,
        MARGIN_T + ph / 2.0,
        MARGIN_T + ph / 2.0,
        esc(axis_titles[1])
    );

    let _ = writeln!(svg, r#"<g id="points">"#);
    for s in series {
        let color = color_for(&labels, &s.label);
        for p in &s.points {
            let (fill, stroke) = if s.hollow { ("none", color) } else { (color, "none") };
            let _ = writeln!(
                svg,
                r#"<circle cx="{:.2}" cy="{:.2}" r="3.5" fill="{fill}" stroke="{stroke}" stroke-width="1.5"/>"#,
                sx(p[0]),
                sy(p[1])
            );
        }
    }
    let _ = writeln!(svg, "</g>");

    let _ = writeln!(svg, r##"<g id="centroids" stroke="#000000" stroke-width="2.5">"##);
    for r in regions.centroids().row_iter() {
        let (x, y) = (sx(r[0]), sy(r[1]));
        let _ = writeln!(
            svg,
            r#"<path d="M{:.2},{:.2} L{:.2},{:.2} M{:.2},{:.2} L{:.2},{:.2}"/>"#,
            x - 6.0,
            y - 6.0,
            x + 6.0,
            y + 6.0,
            x - 6.0,
            y + 6.0,
            x + 6.0,
            y - 6.0
        );
    }
    let _ = writeln!(svg, "</g>");

    let _ = writeln!(svg, r#"<g id="legend">"#);
    for (i, l) in labels.iter().enumerate() {
        let y = MARGIN_T + 10.0 + 20.0 * i as f64;
        let x = WIDTH - MARGIN_R + 16.0;
        let _ = writeln!(svg, r#"<circle cx="{x:.2}" cy="{y:.2}" r="5" fill="{}"/>"#, color_for(&labels, l));
        let _ = writeln!(svg, r#"<text x="{:.2}" y="{:.2}">{}</text>"#, x + 10.0, y + 4.0, esc(l));
    }
    let _ = writeln!(svg, "</g>");
    svg.push_str("</svg>\n");
    Ok(svg)
}

fn tick(v: f64) -> String {
    let s = format!("{v:.2}");
    if s == "-0.00" { "0.00".into() } else { s }
}
