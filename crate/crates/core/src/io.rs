//! Point cloud file I/O: PLY (ASCII / binary little-endian) and XYZ text.

use std::path::Path;

use nalgebra::Point3;

use crate::cloud::PointCloud;
use crate::error::{Error, Result};

/// On-disk PLY encodings supported by [`write_ply`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PlyFormat {
    Ascii,
    BinaryLittleEndian,
}

/// Loads a cloud, dispatching on the file extension (`.ply` or `.xyz`).
pub fn load_cloud(path: impl AsRef<Path>) -> Result<PointCloud> {
    let path = path.as_ref();
    match extension_of(path)?.as_str() {
        "ply" => {
            let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
            parse_ply(&bytes)
        }
        "xyz" => {
            let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
            parse_xyz(&text)
        }
        other => Err(Error::UnknownCloudFormat(other.to_string())),
    }
}

/// Saves a cloud, dispatching on the file extension. PLY files are written
/// binary little-endian; use [`write_ply`] directly for ASCII.
pub fn save_cloud(cloud: &PointCloud, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let bytes = match extension_of(path)?.as_str() {
        "ply" => write_ply(cloud, PlyFormat::BinaryLittleEndian)?,
        "xyz" => write_xyz(cloud)?.into_bytes(),
        other => return Err(Error::UnknownCloudFormat(other.to_string())),
    };
    std::fs::write(path, bytes).map_err(|e| Error::io(path, e))
}

fn extension_of(path: &Path) -> Result<String> {
    path.extension()
        .and_then(|e| e.to_str())
        .map(|e| e.to_ascii_lowercase())
        .ok_or_else(|| Error::UnknownCloudFormat(path.display().to_string()))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum ScalarType {
    I8,
    U8,
    I16,
    U16,
    I32,
    U32,
    F32,
    F64,
}

impl ScalarType {
    fn parse(token: &str) -> Option<Self> {
        match token {
            "char" | "int8" => Some(ScalarType::I8),
            "uchar" | "uint8" => Some(ScalarType::U8),
            "short" | "int16" => Some(ScalarType::I16),
            "ushort" | "uint16" => Some(ScalarType::U16),
            "int" | "int32" => Some(ScalarType::I32),
            "uint" | "uint32" => Some(ScalarType::U32),
            "float" | "float32" => Some(ScalarType::F32),
            "double" | "float64" => Some(ScalarType::F64),
            _ => None,
        }
    }

    fn size(self) -> usize {
        match self {
            ScalarType::I8 | ScalarType::U8 => 1,
            ScalarType::I16 | ScalarType::U16 => 2,
            ScalarType::I32 | ScalarType::U32 | ScalarType::F32 => 4,
            ScalarType::F64 => 8,
        }
    }
}

struct PlyHeader {
    format: PlyFormat,
    vertex_count: usize,
    properties: Vec<(ScalarType, String)>,
    data_offset: usize,
}

fn parse_ply_header(bytes: &[u8]) -> Result<PlyHeader> {
    let mut cursor = 0usize;
    let line_at = |cursor: &mut usize| -> Result<String> {
        let rest = &bytes[*cursor..];
        let end = rest
            .iter()
            .position(|&b| b == b'\n')
            .ok_or_else(|| Error::PlyParse("unterminated header".into()))?;
        let line = std::str::from_utf8(&rest[..end])
            .map_err(|_| Error::PlyParse("non-UTF8 header".into()))?
            .trim_end_matches('\r')
            .to_string();
        *cursor += end + 1;
        Ok(line)
    };

    if line_at(&mut cursor)?.trim() != "ply" {
        return Err(Error::PlyParse("missing \"ply\" magic line".into()));
    }

    let mut format = None;
    let mut vertex_count = None;
    let mut properties = Vec::new();
    let mut in_vertex_element = false;
    loop {
        let line = line_at(&mut cursor)?;
        let mut tokens = line.split_whitespace();
        match tokens.next() {
            Some("format") => {
                format = Some(match (tokens.next(), tokens.next()) {
                    (Some("ascii"), Some("1.0")) => PlyFormat::Ascii,
                    (Some("binary_little_endian"), Some("1.0")) => PlyFormat::BinaryLittleEndian,
                    (Some(other), _) => {
                        return Err(Error::PlyParse(format!("unsupported format {other:?}")))
                    }
                    _ => return Err(Error::PlyParse(format!("bad format line {line:?}"))),
                });
            }
            Some("comment") | Some("obj_info") => {}
            Some("element") => {
                let name = tokens.next().unwrap_or("");
                let count: usize = tokens
                    .next()
                    .and_then(|t| t.parse().ok())
                    .ok_or_else(|| Error::PlyParse(format!("bad element line {line:?}")))?;
                if name == "vertex" {
                    if vertex_count.is_some() {
                        return Err(Error::PlyParse("duplicate vertex element".into()));
                    }
                    vertex_count = Some(count);
                    in_vertex_element = true;
                } else {
                    if vertex_count.is_none() {
                        return Err(Error::PlyParse(format!(
                            "element {name:?} precedes vertex element"
                        )));
                    }
                    in_vertex_element = false;
                }
            }
            Some("property") => {
                if !in_vertex_element {
                    continue; // properties of trailing elements are ignored
                }
                let first = tokens.next().unwrap_or("");
                if first == "list" {
                    return Err(Error::PlyParse(
                        "list property in vertex element is unsupported".into(),
                    ));
                }
                let scalar = ScalarType::parse(first)
                    .ok_or_else(|| Error::PlyParse(format!("unknown property type {first:?}")))?;
                let name = tokens
                    .next()
                    .ok_or_else(|| Error::PlyParse(format!("unnamed property in {line:?}")))?;
                properties.push((scalar, name.to_string()));
            }
            Some("end_header") => break,
            Some(other) => {
                return Err(Error::PlyParse(format!("unknown header keyword {other:?}")));
            }
            None => {}
        }
    }

    Ok(PlyHeader {
        format: format.ok_or_else(|| Error::PlyParse("missing format line".into()))?,
        vertex_count: vertex_count.ok_or_else(|| Error::PlyParse("missing vertex element".into()))?,
        properties,
        data_offset: cursor,
    })
}

/// Parses a PLY byte stream. The vertex element must come first and carry
/// float or double x/y/z; uchar red/green/blue are picked up when present.
pub fn parse_ply(bytes: &[u8]) -> Result<PointCloud> {
    let header = parse_ply_header(bytes)?;

    let find = |name: &str| header.properties.iter().position(|(_, n)| n == name);
    let coord = |name: &str| -> Result<usize> {
        let idx = find(name)
            .ok_or_else(|| Error::PlyParse(format!("missing coordinate property {name:?}")))?;
        match header.properties[idx].0 {
            ScalarType::F32 | ScalarType::F64 => Ok(idx),
            other => Err(Error::PlyParse(format!(
                "property {name:?} has type {other:?}, expected float32 or float64"
            ))),
        }
    };
    let (xi, yi, zi) = (coord("x")?, coord("y")?, coord("z")?);
    let rgb = match (find("red"), find("green"), find("blue")) {
        (Some(r), Some(g), Some(b))
            if [r, g, b]
                .iter()
                .all(|&i| header.properties[i].0 == ScalarType::U8) =>
        {
            Some([r, g, b])
        }
        _ => None,
    };

    // Capacity is clamped so a corrupt header cannot force a giant
    // allocation before the data length is checked.
    let reserve = header.vertex_count.min(1 << 20);
    let mut points = Vec::with_capacity(reserve);
    let mut colors = rgb.map(|_| Vec::with_capacity(reserve));

    match header.format {
        PlyFormat::Ascii => {
            let text = std::str::from_utf8(&bytes[header.data_offset..])
                .map_err(|_| Error::PlyParse("non-UTF8 ASCII data".into()))?;
            let mut lines = text.lines().filter(|l| !l.trim().is_empty());
            for row in 0..header.vertex_count {
                let line = lines
                    .next()
                    .ok_or_else(|| Error::PlyParse("unexpected end of vertex data".into()))?;
                let values: Vec<f64> = line
                    .split_whitespace()
                    .map(|t| {
                        t.parse::<f64>()
                            .map_err(|_| Error::PlyParse(format!("bad value {t:?} in row {row}")))
                    })
                    .collect::<Result<_>>()?;
                if values.len() != header.properties.len() {
                    return Err(Error::PlyParse(format!(
                        "row {row} has {} values, expected {}",
                        values.len(),
                        header.properties.len()
                    )));
                }
                points.push(Point3::new(values[xi], values[yi], values[zi]));
                if let (Some(cs), Some([r, g, b])) = (&mut colors, rgb) {
                    cs.push([values[r] as u8, values[g] as u8, values[b] as u8]);
                }
            }
        }
        PlyFormat::BinaryLittleEndian => {
            let stride: usize = header.properties.iter().map(|(t, _)| t.size()).sum();
            let offsets: Vec<usize> = header
                .properties
                .iter()
                .scan(0, |acc, (t, _)| {
                    let at = *acc;
                    *acc += t.size();
                    Some(at)
                })
                .collect();
            let data = &bytes[header.data_offset..];
            let needed = stride
                .checked_mul(header.vertex_count)
                .ok_or_else(|| Error::PlyParse("vertex count overflows".into()))?;
            if data.len() < needed {
                return Err(Error::PlyParse("unexpected end of vertex data".into()));
            }
            let scalar_at = |record: &[u8], prop: usize| -> f64 {
                let at = offsets[prop];
                match header.properties[prop].0 {
                    ScalarType::F32 => {
                        f32::from_le_bytes(record[at..at + 4].try_into().unwrap()) as f64
                    }
                    ScalarType::F64 => f64::from_le_bytes(record[at..at + 8].try_into().unwrap()),
                    ScalarType::U8 => record[at] as f64,
                    ScalarType::I8 => record[at] as i8 as f64,
                    ScalarType::I16 => {
                        i16::from_le_bytes(record[at..at + 2].try_into().unwrap()) as f64
                    }
                    ScalarType::U16 => {
                        u16::from_le_bytes(record[at..at + 2].try_into().unwrap()) as f64
                    }
                    ScalarType::I32 => {
                        i32::from_le_bytes(record[at..at + 4].try_into().unwrap()) as f64
                    }
                    ScalarType::U32 => {
                        u32::from_le_bytes(record[at..at + 4].try_into().unwrap()) as f64
                    }
                }
            };
            for row in 0..header.vertex_count {
                let record = &data[row * stride..(row + 1) * stride];
                points.push(Point3::new(
                    scalar_at(record, xi),
                    scalar_at(record, yi),
                    scalar_at(record, zi),
                ));
                if let (Some(cs), Some([r, g, b])) = (&mut colors, rgb) {
                    cs.push([record[offsets[r]], record[offsets[g]], record[offsets[b]]]);
                }
            }
        }
    }

    let cloud = PointCloud { points, colors };
    if !cloud.is_finite() {
        return Err(Error::NonFiniteCoordinate);
    }
    Ok(cloud)
}

/// Encodes the cloud as PLY with double-precision coordinates, so that a
/// write/parse cycle reproduces the points exactly in either format.
pub fn write_ply(cloud: &PointCloud, format: PlyFormat) -> Result<Vec<u8>> {
    if !cloud.is_finite() {
        return Err(Error::NonFiniteCoordinate);
    }
    let mut header = String::from("ply\n");
    header.push_str(match format {
        PlyFormat::Ascii => "format ascii 1.0\n",
        PlyFormat::BinaryLittleEndian => "format binary_little_endian 1.0\n",
    });
    header.push_str(&format!("element vertex {}\n", cloud.len()));
    header.push_str("property double x\nproperty double y\nproperty double z\n");
    if cloud.colors.is_some() {
        header.push_str("property uchar red\nproperty uchar green\nproperty uchar blue\n");
    }
    header.push_str("end_header\n");

    let mut out = header.into_bytes();
    match format {
        PlyFormat::Ascii => {
            for (i, p) in cloud.points.iter().enumerate() {
                let mut line = format!("{} {} {}", p.x, p.y, p.z);
                if let Some(cs) = &cloud.colors {
                    let [r, g, b] = cs[i];
                    line.push_str(&format!(" {r} {g} {b}"));
                }
                line.push('\n');
                out.extend_from_slice(line.as_bytes());
            }
        }
        PlyFormat::BinaryLittleEndian => {
            for (i, p) in cloud.points.iter().enumerate() {
                out.extend_from_slice(&p.x.to_le_bytes());
                out.extend_from_slice(&p.y.to_le_bytes());
                out.extend_from_slice(&p.z.to_le_bytes());
                if let Some(cs) = &cloud.colors {
                    out.extend_from_slice(&cs[i]);
                }
            }
        }
    }
    Ok(out)
}

/// Parses whitespace-separated `x y z` lines; blank and `#` lines are skipped.
pub fn parse_xyz(text: &str) -> Result<PointCloud> {
    let mut points = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let mut values = trimmed.split_whitespace().map(|t| t.parse::<f64>());
        let mut next = || -> Result<f64> {
            values
                .next()
                .and_then(|v| v.ok())
                .ok_or_else(|| Error::XyzParse {
                    line: lineno + 1,
                    msg: format!("expected 3 numbers, got {trimmed:?}"),
                })
        };
        let p = Point3::new(next()?, next()?, next()?);
        if values.next().is_some() {
            return Err(Error::XyzParse {
                line: lineno + 1,
                msg: "more than 3 values on line".into(),
            });
        }
        points.push(p);
    }
    let cloud = PointCloud::from_points(points);
    if !cloud.is_finite() {
        return Err(Error::NonFiniteCoordinate);
    }
    Ok(cloud)
}

pub fn write_xyz(cloud: &PointCloud) -> Result<String> {
    if !cloud.is_finite() {
        return Err(Error::NonFiniteCoordinate);
    }
    let mut out = String::new();
    for p in &cloud.points {
        out.push_str(&format!("{} {} {}\n", p.x, p.y, p.z));
    }
    Ok(out)
}
