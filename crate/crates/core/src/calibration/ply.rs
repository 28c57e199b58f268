//! Minimal ASCII PLY reader for `x y z red green blue` vertex clouds.

use std::path::Path;

use super::FitError;

#[derive(Debug, Clone, Default, PartialEq)]
pub struct PointCloud {
    pub positions: Vec<[f64; 3]>,
    /// RGB in the file's native range (0–255 for `uchar`).
    pub colors: Vec<[f64; 3]>,
}

struct Element {
    name: String,
    count: usize,
    properties: Vec<String>,
}

fn bad(msg: impl Into<String>) -> FitError {
    FitError::Ply(msg.into())
}

pub fn parse_ascii_ply(text: &str) -> Result<PointCloud, FitError> {
    let mut lines = text.lines();
    if lines.next().map(str::trim) != Some("ply") {
        return Err(bad("missing `ply` magic"));
    }
    let mut elements: Vec<Element> = Vec::new();
    let mut ascii = false;
    loop {
        let line = lines
            .next()
            .ok_or_else(|| bad("header has no end_header"))?;
        let tokens: Vec<&str> = line.split_whitespace().collect();
        match tokens.as_slice() {
            ["format", "ascii", _] => ascii = true,
            ["format", other, ..] => return Err(bad(format!("unsupported format `{other}`"))),
            ["element", name, count] => elements.push(Element {
                name: (*name).to_owned(),
                count: count
                    .parse()
                    .map_err(|_| bad(format!("bad count `{count}`")))?,
                properties: Vec::new(),
            }),
            ["property", "list", ..] => {
                let el = elements
                    .last_mut()
                    .ok_or_else(|| bad("property before element"))?;
                el.properties.push("<list>".to_owned());
            }
            ["property", _ty, name] => {
                let el = elements
                    .last_mut()
                    .ok_or_else(|| bad("property before element"))?;
                el.properties.push((*name).to_owned());
            }
            ["end_header"] => break,
            _ => {}
        }
    }
    if !ascii {
        return Err(bad("only ASCII PLY is supported"));
    }
    let mut cloud = PointCloud::default();
    for el in &elements {
        if el.name != "vertex" {
            for _ in 0..el.count {
                lines.next().ok_or_else(|| bad("body ends early"))?;
            }
            continue;
        }
        let index = |name: &str| {
            el.properties
                .iter()
                .position(|p| p == name)
                .ok_or_else(|| bad(format!("vertex has no `{name}` property")))
        };
        let cols = [
            index("x")?,
            index("y")?,
            index("z")?,
            index("red")?,
            index("green")?,
            index("blue")?,
        ];
        cloud.positions.reserve(el.count);
        cloud.colors.reserve(el.count);
        for i in 0..el.count {
            let line = lines.next().ok_or_else(|| bad("body ends early"))?;
            let values: Vec<f64> = line
                .split_whitespace()
                .map(str::parse)
                .collect::<Result<_, _>>()
                .map_err(|_| bad(format!("non-numeric vertex {i}")))?;
            let get = |c: usize| {
                values
                    .get(c)
                    .copied()
                    .ok_or_else(|| bad(format!("vertex {i} is short")))
            };
            cloud
                .positions
                .push([get(cols[0])?, get(cols[1])?, get(cols[2])?]);
            cloud
                .colors
                .push([get(cols[3])?, get(cols[4])?, get(cols[5])?]);
        }
    }
    Ok(cloud)
}

pub fn read_ascii_ply(path: impl AsRef<Path>) -> Result<PointCloud, FitError> {
    let text = std::fs::read_to_string(path).map_err(|e| bad(e.to_string()))?;
    parse_ascii_ply(&text)
}
