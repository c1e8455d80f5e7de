//! PNG encoding and decoding for label maps, binary masks and RGB images.

use std::io::Cursor;

use png::{BitDepth, ColorType, Transformations};

use crate::error::{Error, Result};
use crate::maskcore::{BinaryMask, LabelMap, DEFAULT_IGNORE};
use crate::raster::RgbImage;

fn png_err(e: impl std::fmt::Display) -> Error {
    Error::Format(format!("png: {e}"))
}

struct Decoded {
    width: u32,
    height: u32,
    color: ColorType,
    depth: BitDepth,
    data: Vec<u8>,
}

fn decode_raw(bytes: &[u8], transformations: Transformations) -> Result<Decoded> {
    let mut decoder = png::Decoder::new(Cursor::new(bytes));
    decoder.set_transformations(transformations);
    let mut reader = decoder.read_info().map_err(png_err)?;
    let size = reader
        .output_buffer_size()
        .ok_or_else(|| Error::Format("png: image too large".into()))?;
    let mut buf = vec![0; size];
    let info = reader.next_frame(&mut buf).map_err(png_err)?;
    buf.truncate(info.buffer_size());
    Ok(Decoded {
        width: info.width,
        height: info.height,
        color: info.color_type,
        depth: info.bit_depth,
        data: buf,
    })
}

fn encode_raw(
    width: u32,
    height: u32,
    color: ColorType,
    palette: Option<Vec<u8>>,
    data: &[u8],
) -> Vec<u8> {
    let mut out = Vec::new();
    {
        let mut encoder = png::Encoder::new(&mut out, width, height);
        encoder.set_color(color);
        encoder.set_depth(BitDepth::Eight);
        encoder.set_compression(png::Compression::Balanced);
        if let Some(p) = palette {
            encoder.set_palette(p);
        }
        let mut writer = encoder.write_header().expect("in-memory png header");
        writer.write_image_data(data).expect("in-memory png data");
    }
    out
}

/// Decodes an 8-bit paletted or grayscale PNG into class ids taken verbatim
/// from the palette index or gray value. 255 is the ignore value.
pub fn decode_palette_png(bytes: &[u8]) -> Result<LabelMap> {
    let d = decode_raw(bytes, Transformations::IDENTITY)?;
    if d.depth != BitDepth::Eight {
        return Err(Error::Format(format!(
            "label PNG must be 8-bit, found {:?}",
            d.depth
        )));
    }
    match d.color {
        ColorType::Indexed | ColorType::Grayscale => {}
        other => {
            return Err(Error::Format(format!(
                "label PNG must be paletted or grayscale, found {other:?}"
            )))
        }
    }
    LabelMap::new(d.width, d.height, d.data, DEFAULT_IGNORE)
}

/// Standard PASCAL VOC colormap.
pub fn pascal_palette() -> Vec<u8> {
    let mut out = Vec::with_capacity(256 * 3);
    for i in 0..256u32 {
        let (mut r, mut g, mut b) = (0u8, 0u8, 0u8);
        let mut c = i;
        for j in 0..8 {
            r |= ((c & 1) as u8) << (7 - j);
            g |= (((c >> 1) & 1) as u8) << (7 - j);
            b |= (((c >> 2) & 1) as u8) << (7 - j);
            c >>= 3;
        }
        out.extend_from_slice(&[r, g, b]);
    }
    out
}

/// Encodes a label map as an 8-bit paletted PNG with the PASCAL colormap.
pub fn encode_label_png(map: &LabelMap) -> Vec<u8> {
    encode_raw(
        map.width(),
        map.height(),
        ColorType::Indexed,
        Some(pascal_palette()),
        map.labels(),
    )
}

/// Encodes a mask as 8-bit grayscale, 0 = background and 255 = foreground.
pub fn encode_mask_png(mask: &BinaryMask) -> Vec<u8> {
    let data: Vec<u8> = (0..mask.len())
        .map(|i| if mask.get_index(i) { 255 } else { 0 })
        .collect();
    encode_raw(mask.width(), mask.height(), ColorType::Grayscale, None, &data)
}

/// Decodes an 8-bit grayscale mask PNG. Only the values 0 and 255 are accepted.
pub fn decode_mask_png(bytes: &[u8]) -> Result<BinaryMask> {
    let d = decode_raw(bytes, Transformations::IDENTITY)?;
    if d.depth != BitDepth::Eight || d.color != ColorType::Grayscale {
        return Err(Error::Format(format!(
            "mask PNG must be 8-bit grayscale, found {:?}/{:?}",
            d.color, d.depth
        )));
    }
    let mut mask = BinaryMask::empty(d.width, d.height);
    for (i, &v) in d.data.iter().enumerate() {
        match v {
            0 => {}
            255 => mask.set_index(i, true),
            other => {
                return Err(Error::Format(format!(
                    "mask PNG holds gray value {other} at pixel {i}; only 0/255 allowed"
                )))
            }
        }
    }
    Ok(mask)
}

pub fn encode_rgb_png(image: &RgbImage) -> Vec<u8> {
    encode_raw(image.width(), image.height(), ColorType::Rgb, None, image.data())
}

/// Decodes an 8-bit PNG into RGB. Gray is replicated, alpha dropped and
/// palettes expanded.
pub fn decode_rgb_png(bytes: &[u8]) -> Result<RgbImage> {
    let d = decode_raw(bytes, Transformations::EXPAND)?;
    if d.depth != BitDepth::Eight {
        return Err(Error::Format(format!(
            "image PNG must be 8-bit, found {:?}",
            d.depth
        )));
    }
    let data = match d.color {
        ColorType::Rgb => d.data,
        ColorType::Rgba => d
            .data
            .chunks_exact(4)
            .flat_map(|p| [p[0], p[1], p[2]])
            .collect(),
        ColorType::Grayscale => d.data.iter().flat_map(|&g| [g, g, g]).collect(),
        ColorType::GrayscaleAlpha => d
            .data
            .chunks_exact(2)
            .flat_map(|p| [p[0], p[0], p[0]])
            .collect(),
        ColorType::Indexed => {
            return Err(Error::Format("palette was not expanded".into()));
        }
    };
    RgbImage::new(d.width, d.height, data)
}
