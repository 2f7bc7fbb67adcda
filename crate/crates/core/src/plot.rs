//! SVG rendering of trajectories, shallow regions and circle covers.

use std::fmt::Write as _;
use std::io::Read;

use thiserror::Error;

use crate::circle_cover::CircleCover;
use crate::geometry::Vec2;

#[derive(Debug, Error)]
pub enum PlotError {
    #[error("malformed trajectory CSV: {0}")]
    Csv(String),
    #[error("trajectory log has no rows")]
    Empty,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Tracks {
    pub ego: Vec<Vec2>,
    pub targets: Vec<(String, Vec<Vec2>)>,
}

/// Reads ego and target positions from a trajectory CSV.
pub fn read_tracks<R: Read>(input: R) -> Result<Tracks, PlotError> {
    let mut rdr = csv::Reader::from_reader(input);
    let header = rdr.headers().map_err(|e| PlotError::Csv(e.to_string()))?.clone();
    let col = |name: &str| {
        header
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| PlotError::Csv(format!("missing column {name}")))
    };
    let (en, ee, ve, feas) = (col("ego_n")?, col("ego_e")?, col("ego_ve")?, col("feasible")?);
    let ids: Vec<(String, usize, usize)> = header
        .iter()
        .enumerate()
        .skip(ve + 1)
        .take(feas.saturating_sub(ve + 1))
        .step_by(2)
        .map(|(i, h)| {
            let id = h
                .strip_suffix("_n")
                .ok_or_else(|| PlotError::Csv(format!("unexpected column {h}")))?;
            if header.get(i + 1) != Some(&format!("{id}_e")[..]) {
                return Err(PlotError::Csv(format!("column {h} lacks its _e partner")));
            }
            Ok((id.to_string(), i, i + 1))
        })
        .collect::<Result<_, _>>()?;

    let mut tracks = Tracks {
        ego: Vec::new(),
        targets: ids.iter().map(|(id, _, _)| (id.clone(), Vec::new())).collect(),
    };
    for (row, rec) in rdr.records().enumerate() {
        let rec = rec.map_err(|e| PlotError::Csv(e.to_string()))?;
        let num = |i: usize| -> Result<f64, PlotError> {
            rec.get(i)
                .and_then(|s| s.parse::<f64>().ok())
                .filter(|x| x.is_finite())
                .ok_or_else(|| PlotError::Csv(format!("row {}: bad number in column {}", row + 1, &header[i])))
        };
        tracks.ego.push(Vec2::new(num(en)?, num(ee)?));
        for (k, (_, n, e)) in ids.iter().enumerate() {
            tracks.targets[k].1.push(Vec2::new(num(*n)?, num(*e)?));
        }
    }
    if tracks.ego.is_empty() {
        return Err(PlotError::Empty);
    }
    Ok(tracks)
}

const WIDTH: f64 = 800.0;
const PALETTE: [&str; 6] = ["#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b", "#e377c2"];

struct Frame {
    min: Vec2,
    max: Vec2,
    scale: f64,
    height: f64,
}

impl Frame {
    fn fit(points: impl Iterator<Item = Vec2>) -> Frame {
        let mut min = Vec2::new(f64::INFINITY, f64::INFINITY);
        let mut max = Vec2::new(f64::NEG_INFINITY, f64::NEG_INFINITY);
        for p in points {
            min = Vec2::new(min.n.min(p.n), min.e.min(p.e));
            max = Vec2::new(max.n.max(p.n), max.e.max(p.e));
        }
        let span = (max.n - min.n).max(max.e - min.e).max(1.0);
        let pad = 0.05 * span;
        min -= Vec2::new(pad, pad);
        max += Vec2::new(pad, pad);
        let scale = WIDTH / (max.e - min.e).max(1.0);
        let height = ((max.n - min.n) * scale).max(1.0);
        Frame { min, max, scale, height }
    }

    /// East to the right, North up.
    fn xy(&self, p: Vec2) -> (f64, f64) {
        ((p.e - self.min.e) * self.scale, (self.max.n - p.n) * self.scale)
    }
}

/// Renders tracks, covers (with their source regions) and start/goal
/// markers. Identical inputs give identical bytes.
pub fn render_svg(tracks: &Tracks, covers: &[CircleCover], goal: Option<Vec2>) -> String {
    let disc_corners = covers.iter().flat_map(|c| c.circles.iter()).flat_map(|d| {
        let r = Vec2::new(d.radius, d.radius);
        [d.center - r, d.center + r]
    });
    let region_points = covers.iter().filter_map(|c| c.region.as_ref()).flat_map(|p| p.vertices().to_vec());
    let frame = Frame::fit(
        tracks
            .ego
            .iter()
            .copied()
            .chain(tracks.targets.iter().flat_map(|(_, t)| t.iter().copied()))
            .chain(disc_corners)
            .chain(region_points)
            .chain(goal),
    );

    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w:.0}" height="{h:.0}" viewBox="0 0 {w:.2} {h:.2}">"#,
        w = WIDTH,
        h = frame.height
    );
    let _ = writeln!(s, r##"<rect x="0" y="0" width="100%" height="100%" fill="#f4f8fb"/>"##);

    for cover in covers {
        if let Some(region) = &cover.region {
            let pts = points_attr(&frame, region.vertices().iter().copied());
            let _ = writeln!(
                s,
                r##"<polygon class="region" points="{pts}" fill="#c8a165" fill-opacity="0.6" stroke="#8a6d3b" stroke-width="1"/>"##
            );
        }
    }
    for cover in covers {
        for d in &cover.circles {
            let (x, y) = frame.xy(d.center);
            let _ = writeln!(
                s,
                r##"<circle class="cover" cx="{x:.2}" cy="{y:.2}" r="{:.2}" fill="none" stroke="#1f77b4" stroke-dasharray="4 3"/>"##,
                d.radius * frame.scale
            );
        }
    }
    for (k, (id, track)) in tracks.targets.iter().enumerate() {
        let pts = points_attr(&frame, track.iter().copied());
        let _ = writeln!(
            s,
            r#"<polyline class="track target" data-id="{}" points="{pts}" fill="none" stroke="{}" stroke-width="2"/>"#,
            xml_escape(id),
            PALETTE[k % PALETTE.len()]
        );
    }
    let pts = points_attr(&frame, tracks.ego.iter().copied());
    let _ = writeln!(
        s,
        r##"<polyline class="track ego" data-id="ego" points="{pts}" fill="none" stroke="#000000" stroke-width="2.5"/>"##
    );

    let marker_size = 6.0;
    let mut starts: Vec<Vec2> = vec![tracks.ego[0]];
    starts.extend(tracks.targets.iter().filter_map(|(_, t)| t.first().copied()));
    for p in starts {
        let (x, y) = frame.xy(p);
        let _ = writeln!(
            s,
            r##"<rect class="start" x="{:.2}" y="{:.2}" width="{w:.2}" height="{w:.2}" fill="#000000"/>"##,
            x - marker_size / 2.0,
            y - marker_size / 2.0,
            w = marker_size
        );
    }
    let end = goal.unwrap_or(*tracks.ego.last().expect("nonempty"));
    let (x, y) = frame.xy(end);
    let m = marker_size;
    let _ = writeln!(
        s,
        r##"<path class="goal" d="M {:.2} {:.2} L {:.2} {:.2} L {:.2} {:.2} L {:.2} {:.2} Z" fill="#ffd700" stroke="#000000"/>"##,
        x,
        y - m,
        x + m,
        y,
        x,
        y + m,
        x - m,
        y
    );
    s.push_str("</svg>\n");
    s
}

fn points_attr(frame: &Frame, pts: impl Iterator<Item = Vec2>) -> String {
    let mut out = String::new();
    for (i, p) in pts.enumerate() {
        let (x, y) = frame.xy(p);
        if i > 0 {
            out.push(' ');
        }
        let _ = write!(out, "{x:.2},{y:.2}");
    }
    out
}

fn xml_escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;").replace('"', "&quot;")
}
