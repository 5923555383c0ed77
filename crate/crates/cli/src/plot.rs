use std::collections::BTreeMap;
use std::f64::consts::TAU;
use std::fmt::Write;
use std::path::Path;

use camsight::geometry::{Pose2, Pose3};
use camsight::graph::cone_half_angle;
use camsight::io::{self, CameraDoc, DocPose, ReconstructionFile, SceneFile, SightingFile};
use serde_json::{json, Value};

use crate::commands::table_csv;
use crate::{emit, read_file, CliError, CliResult};

const WEDGE_RADIUS: f64 = 0.25;

/// A camera as drawn: planar position, axis direction angle, wedge half-angle
/// (`None` for a full field of view).
struct Glyph {
    x: f64,
    y: f64,
    axis: f64,
    half: Option<f64>,
}

fn glyph(doc: &CameraDoc, dim: u8, fov: Option<f64>) -> CliResult<Glyph> {
    let (x, y, axis, full) = match dim {
        2 => {
            let p = Pose2::from_doc(doc)?;
            (p.position().x, p.position().y, p.axis_angle(), TAU)
        }
        3 => {
            let p = Pose3::from_doc(doc)?;
            let a = p.axis();
            (p.position().x, p.position().y, a.y.atan2(a.x), 2.0 * TAU)
        }
        d => return Err(CliError::input(format!("dimension must be 2 or 3, got {d}"))),
    };
    let half = fov.filter(|&f| f < full).map(|f| if dim == 2 { f / 2.0 } else { cone_half_angle(f) });
    Ok(Glyph { x, y, axis, half })
}

pub fn plot(input: &Path, sightings: Option<&Path>, fov: Option<f64>, out: &Path) -> CliResult<()> {
    let text = read_file(input)?;
    let inputs = json!({
        "input": input.display().to_string(),
        "sightings": sightings.map(|p| p.display().to_string()),
        "fov": fov,
    });
    if out.extension().is_some_and(|e| e.eq_ignore_ascii_case("csv")) {
        let doc: Value = io::from_json(&text)?;
        let table = doc
            .as_object()
            .and_then(|o| o.values().find(|v| v.as_array().is_some_and(|a| a.first().is_some_and(Value::is_object))))
            .ok_or_else(|| CliError::input("document has no table to write"))?;
        return emit(Some(out), &table_csv(table), "plot", inputs, None);
    }
    let (kind, dim) = io::peek(&text)?;
    let (dim, cams, fov) = match kind.as_str() {
        "scene" => {
            let f: SceneFile = io::from_json(&text)?;
            (f.dim, f.cameras, fov.or(Some(f.fov)))
        }
        "reconstruction" => {
            let f: ReconstructionFile = io::from_json(&text)?;
            (f.dim, f.cameras, fov)
        }
        other => {
            let _ = dim;
            return Err(CliError::input(format!("cannot draw a document of kind {other:?}")));
        }
    };
    let glyphs: BTreeMap<u32, Glyph> =
        cams.iter().map(|c| Ok((c.id, glyph(c, dim, fov)?))).collect::<CliResult<_>>()?;
    let arrows = match sightings {
        Some(p) => {
            let f: SightingFile = io::from_json(&read_file(p)?)?;
            f.sightings.iter().map(|s| (s.obs, s.tgt)).collect()
        }
        None => Vec::new(),
    };
    let svg = render(&glyphs, &arrows)?;
    emit(Some(out), &svg, "plot", inputs, None)
}

fn render(glyphs: &BTreeMap<u32, Glyph>, arrows: &[(u32, u32)]) -> CliResult<String> {
    let (mut lo_x, mut lo_y, mut hi_x, mut hi_y) = (-1.0f64, -1.0f64, 1.0f64, 1.0f64);
    for g in glyphs.values() {
        lo_x = lo_x.min(g.x);
        lo_y = lo_y.min(g.y);
        hi_x = hi_x.max(g.x);
        hi_y = hi_y.max(g.y);
    }
    let m = WEDGE_RADIUS * 1.5;
    let (w, h) = (hi_x - lo_x + 2.0 * m, hi_y - lo_y + 2.0 * m);
    let mut s = String::new();
    // The y axis is flipped so that world y points up.
    writeln!(
        s,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"{:.6} {:.6} {:.6} {:.6}\" width=\"600\" height=\"{:.0}\">",
        lo_x - m,
        -hi_y - m,
        w,
        h,
        600.0 * h / w
    )
    .unwrap();
    writeln!(s, "<defs><marker id=\"head\" viewBox=\"0 0 10 10\" refX=\"10\" refY=\"5\" markerWidth=\"6\" markerHeight=\"6\" orient=\"auto\"><path d=\"M0,0 L10,5 L0,10 z\"/></marker></defs>").unwrap();
    writeln!(s, "<g stroke-width=\"{:.6}\">", 0.005 * w.max(h)).unwrap();
    for g in glyphs.values() {
        match g.half {
            Some(half) => {
                let (a0, a1) = (g.axis - half, g.axis + half);
                let large = if 2.0 * half > std::f64::consts::PI { 1 } else { 0 };
                writeln!(
                    s,
                    "<path class=\"wedge\" fill=\"#8ecae6\" fill-opacity=\"0.4\" stroke=\"#219ebc\" d=\"M{:.6},{:.6} L{:.6},{:.6} A{r:.6},{r:.6} 0 {large} 0 {:.6},{:.6} Z\"/>",
                    g.x,
                    -g.y,
                    g.x + WEDGE_RADIUS * a0.cos(),
                    -(g.y + WEDGE_RADIUS * a0.sin()),
                    g.x + WEDGE_RADIUS * a1.cos(),
                    -(g.y + WEDGE_RADIUS * a1.sin()),
                    r = WEDGE_RADIUS,
                )
                .unwrap();
            }
            None => writeln!(
                s,
                "<circle class=\"wedge\" fill=\"#8ecae6\" fill-opacity=\"0.4\" stroke=\"#219ebc\" cx=\"{:.6}\" cy=\"{:.6}\" r=\"{WEDGE_RADIUS:.6}\"/>",
                g.x, -g.y
            )
            .unwrap(),
        }
    }
    for (obs, tgt) in arrows {
        let (a, b) = match (glyphs.get(obs), glyphs.get(tgt)) {
            (Some(a), Some(b)) => (a, b),
            _ => return Err(CliError::input(format!("sighting {obs} -> {tgt} names a camera not in the input"))),
        };
        writeln!(
            s,
            "<line class=\"sighting\" stroke=\"#555555\" marker-end=\"url(#head)\" x1=\"{:.6}\" y1=\"{:.6}\" x2=\"{:.6}\" y2=\"{:.6}\"/>",
            a.x, -a.y, b.x, -b.y
        )
        .unwrap();
    }
    for (id, g) in glyphs {
        writeln!(s, "<circle class=\"camera\" fill=\"#023047\" cx=\"{:.6}\" cy=\"{:.6}\" r=\"{:.6}\"/>", g.x, -g.y, 0.01 * w.max(h))
            .unwrap();
        writeln!(
            s,
            "<text x=\"{:.6}\" y=\"{:.6}\" font-size=\"{:.6}\">{id}</text>",
            g.x + 0.02 * w,
            -g.y - 0.02 * h,
            0.03 * w.max(h)
        )
        .unwrap();
    }
    s.push_str("</g>\n</svg>\n");
    Ok(s)
}
