//! NRRD reader/writer for 3D scalar volumes. Reads raw and gzip payloads in
//! either byte order; writes NRRD0004 with a raw little-endian payload.

use std::fs;
use std::io::Read;
use std::path::Path;

use flate2::read::GzDecoder;
use voiforge_core::{Geometry, ImageVolume, Mask};

use crate::error::{Result, VfError};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ScalarType {
    I8,
    U8,
    I16,
    U16,
    I32,
    U32,
    I64,
    U64,
    F32,
    F64,
}

impl ScalarType {
    fn parse(s: &str) -> Option<ScalarType> {
        Some(match s {
            "signed char" | "int8" | "int8_t" | "char" => ScalarType::I8,
            "uchar" | "unsigned char" | "uint8" | "uint8_t" => ScalarType::U8,
            "short" | "short int" | "signed short" | "signed short int" | "int16" | "int16_t" => ScalarType::I16,
            "ushort" | "unsigned short" | "unsigned short int" | "uint16" | "uint16_t" => ScalarType::U16,
            "int" | "signed int" | "int32" | "int32_t" => ScalarType::I32,
            "uint" | "unsigned int" | "uint32" | "uint32_t" => ScalarType::U32,
            "longlong" | "long long" | "long long int" | "signed long long" | "signed long long int" | "int64"
            | "int64_t" => ScalarType::I64,
            "ulonglong" | "unsigned long long" | "unsigned long long int" | "uint64" | "uint64_t" => ScalarType::U64,
            "float" => ScalarType::F32,
            "double" => ScalarType::F64,
            _ => return None,
        })
    }

    fn size(self) -> usize {
        match self {
            ScalarType::I8 | ScalarType::U8 => 1,
            ScalarType::I16 | ScalarType::U16 => 2,
            ScalarType::I32 | ScalarType::U32 | ScalarType::F32 => 4,
            ScalarType::I64 | ScalarType::U64 | ScalarType::F64 => 8,
        }
    }

    fn decode(self, b: &[u8], big: bool) -> f64 {
        macro_rules! conv {
            ($t:ty) => {{
                let arr = b.try_into().unwrap();
                (if big { <$t>::from_be_bytes(arr) } else { <$t>::from_le_bytes(arr) }) as f64
            }};
        }
        match self {
            ScalarType::I8 => b[0] as i8 as f64,
            ScalarType::U8 => b[0] as f64,
            ScalarType::I16 => conv!(i16),
            ScalarType::U16 => conv!(u16),
            ScalarType::I32 => conv!(i32),
            ScalarType::U32 => conv!(u32),
            ScalarType::I64 => conv!(i64),
            ScalarType::U64 => conv!(u64),
            ScalarType::F32 => conv!(f32),
            ScalarType::F64 => conv!(f64),
        }
    }
}

/// Decoded volume before it is interpreted as an image or a mask.
#[derive(Debug, Clone)]
pub struct RawVolume {
    pub geometry: Geometry,
    pub scalar: ScalarType,
    pub data: Vec<f64>,
}

fn bad(path: &Path, msg: impl std::fmt::Display) -> VfError {
    VfError::Data(format!("{}: {msg}", path.display()))
}

fn parse_vector(s: &str) -> Option<Vec<f64>> {
    let s = s.trim();
    if s == "none" {
        return None;
    }
    let inner = s.strip_prefix('(')?.strip_suffix(')')?;
    inner.split(',').map(|t| t.trim().parse::<f64>().ok()).collect()
}

fn parse_vectors(s: &str) -> Vec<Option<Vec<f64>>> {
    let mut out = Vec::new();
    let mut rest = s.trim();
    while !rest.is_empty() {
        if let Some(r) = rest.strip_prefix("none") {
            out.push(None);
            rest = r.trim_start();
        } else if let Some(end) = rest.find(')') {
            out.push(parse_vector(&rest[..=end]));
            rest = rest[end + 1..].trim_start();
        } else {
            out.push(None);
            break;
        }
    }
    out
}

/// Parses a NRRD file with an attached payload.
pub fn read_nrrd(path: &Path) -> Result<RawVolume> {
    let bytes = fs::read(path).map_err(|e| VfError::io(path, e))?;
    if !bytes.starts_with(b"NRRD000") {
        return Err(bad(path, "missing NRRD magic"));
    }
    // header ends at the first empty line
    let mut pos = 0;
    let mut lines = Vec::new();
    loop {
        let end = bytes[pos..].iter().position(|&b| b == b'\n').map(|e| pos + e).ok_or_else(|| bad(path, "truncated header"))?;
        let line = std::str::from_utf8(&bytes[pos..end]).map_err(|_| bad(path, "header is not UTF-8"))?;
        let line = line.trim_end_matches('\r');
        pos = end + 1;
        if line.is_empty() {
            break;
        }
        lines.push(line.to_string());
    }
    let payload = &bytes[pos..];

    let mut scalar = None;
    let mut dimension = None;
    let mut sizes: Option<Vec<usize>> = None;
    let mut spacings: Option<Vec<f64>> = None;
    let mut directions: Option<Vec<Option<Vec<f64>>>> = None;
    let mut origin = None;
    let mut encoding = String::from("raw");
    let mut big_endian = false;
    for line in lines.iter().skip(1) {
        if line.starts_with('#') {
            continue;
        }
        let Some((key, value)) = line.split_once(':') else { continue };
        let value = value.trim_start_matches('=').trim();
        match key.trim() {
            "type" => scalar = Some(ScalarType::parse(value).ok_or_else(|| bad(path, format!("unsupported type '{value}'")))?),
            "dimension" => dimension = value.parse::<usize>().ok(),
            "sizes" => sizes = value.split_whitespace().map(|t| t.parse().ok()).collect(),
            "spacings" => spacings = value.split_whitespace().map(|t| t.parse().ok()).collect(),
            "space directions" => directions = Some(parse_vectors(value)),
            "space origin" => origin = parse_vector(value),
            "encoding" => encoding = value.to_string(),
            "endian" => big_endian = value == "big",
            "data file" | "datafile" => return Err(bad(path, "detached data files are not supported")),
            _ => {}
        }
    }
    let scalar = scalar.ok_or_else(|| bad(path, "missing type"))?;
    if dimension != Some(3) {
        return Err(bad(path, format!("dimension must be 3, got {dimension:?}")));
    }
    let sizes = sizes.filter(|s| s.len() == 3).ok_or_else(|| bad(path, "sizes must list three values"))?;
    let spacing: Vec<f64> = if let Some(d) = directions {
        let axes: Vec<Vec<f64>> = d.into_iter().flatten().collect();
        if axes.len() != 3 || axes.iter().any(|a| a.len() != 3) {
            return Err(bad(path, "space directions must give three 3-vectors"));
        }
        axes.iter().map(|a| a.iter().map(|v| v * v).sum::<f64>().sqrt()).collect()
    } else if let Some(s) = spacings {
        s
    } else {
        return Err(bad(path, "no spacings or space directions"));
    };
    if spacing.len() != 3 {
        return Err(bad(path, "need three spacings"));
    }
    let origin = origin.filter(|o| o.len() == 3).unwrap_or_else(|| vec![0.0; 3]);
    let geometry = Geometry::new(
        [sizes[0], sizes[1], sizes[2]],
        [spacing[0], spacing[1], spacing[2]],
        [origin[0], origin[1], origin[2]],
    )?;

    let raw: Vec<u8> = match encoding.as_str() {
        "raw" => payload.to_vec(),
        "gzip" | "gz" => {
            let mut out = Vec::new();
            GzDecoder::new(payload).read_to_end(&mut out).map_err(|e| bad(path, format!("gzip: {e}")))?;
            out
        }
        other => return Err(bad(path, format!("unsupported encoding '{other}'"))),
    };
    let n = geometry.len();
    let size = scalar.size();
    if raw.len() < n * size {
        return Err(bad(path, format!("payload has {} bytes, expected {}", raw.len(), n * size)));
    }
    // raw payloads may be preceded by skipped bytes; take the tail
    let start = if encoding == "raw" { raw.len() - n * size } else { 0 };
    let data = raw[start..start + n * size].chunks_exact(size).map(|c| scalar.decode(c, big_endian)).collect();
    Ok(RawVolume { geometry, scalar, data })
}

pub fn read_image(path: &Path) -> Result<ImageVolume> {
    let v = read_nrrd(path)?;
    ImageVolume::new(v.geometry, v.data).map_err(|e| bad(path, e))
}

pub fn read_mask(path: &Path) -> Result<Mask> {
    let v = read_nrrd(path)?;
    if let Some(x) = v.data.iter().find(|&&x| x != 0.0 && x != 1.0) {
        return Err(bad(path, format!("non-binary mask (value {x})")));
    }
    Ok(Mask::from_values(v.geometry, &v.data)?)
}

fn header(g: &Geometry, ty: &str) -> String {
    let [sx, sy, sz] = g.spacing;
    let [ox, oy, oz] = g.origin;
    format!(
        "NRRD0004\n# written by voiforge\ntype: {ty}\ndimension: 3\nspace: left-posterior-superior\nsizes: {} {} {}\nspace directions: ({sx},0,0) (0,{sy},0) (0,0,{sz})\nkinds: domain domain domain\nendian: little\nencoding: raw\nspace origin: ({ox},{oy},{oz})\n\n",
        g.dims[0], g.dims[1], g.dims[2]
    )
}

fn write_bytes(path: &Path, head: String, payload: &[u8]) -> Result<()> {
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        fs::create_dir_all(parent).map_err(|e| VfError::io(parent, e))?;
    }
    let mut out = head.into_bytes();
    out.extend_from_slice(payload);
    fs::write(path, out).map_err(|e| VfError::io(path, e))
}

/// Writes a double-precision image.
pub fn write_image(image: &ImageVolume, path: &Path) -> Result<()> {
    let payload: Vec<u8> = image.data().iter().flat_map(|v| v.to_le_bytes()).collect();
    write_bytes(path, header(image.geometry(), "double"), &payload)
}

/// Writes a mask as uint8 0/1.
pub fn write_mask(mask: &Mask, path: &Path) -> Result<()> {
    let payload: Vec<u8> = mask.data().iter().map(|&b| u8::from(b)).collect();
    write_bytes(path, header(mask.geometry(), "uint8"), &payload)
}
