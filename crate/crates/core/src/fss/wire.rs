//! Line-delimited JSON protocol (version 1) spoken with adapter processes.
//!
//! ```text
//! → {"type":"hello","version":1}
//! ← {"type":"hello","version":1,"name":"<adapter name>"}
//! → {"type":"predict","id":<u64>,"query":{"png_b64":...},"support":[{"image":{...},"mask":{...}}]}
//! ← {"type":"result","id":<same>,"mask":{"png_b64":"<8-bit gray PNG, 0/255>"}}
//! ← {"type":"error","id":<same or null>,"message":"..."}
//! → {"type":"shutdown"}
//! ```
//!
//! Images travel as base64 8-bit RGB PNG, masks as base64 8-bit gray PNG.

use base64::engine::general_purpose::STANDARD;
use base64::Engine;
use serde::{Deserialize, Serialize};

use crate::dataio::{decode_mask_png, decode_rgb_png, encode_mask_png, encode_rgb_png};
use crate::error::{Error, Result};
use crate::maskcore::BinaryMask;
use crate::raster::RgbImage;

pub const PROTOCOL_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PngPayload {
    pub png_b64: String,
}

impl PngPayload {
    pub fn from_image(image: &RgbImage) -> Self {
        Self {
            png_b64: STANDARD.encode(encode_rgb_png(image)),
        }
    }

    pub fn from_mask(mask: &BinaryMask) -> Self {
        Self {
            png_b64: STANDARD.encode(encode_mask_png(mask)),
        }
    }

    pub fn bytes(&self) -> Result<Vec<u8>> {
        STANDARD
            .decode(&self.png_b64)
            .map_err(|e| Error::Protocol(format!("invalid base64: {e}")))
    }

    pub fn to_image(&self) -> Result<RgbImage> {
        decode_rgb_png(&self.bytes()?)
    }

    pub fn to_mask(&self) -> Result<BinaryMask> {
        decode_mask_png(&self.bytes()?)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SupportPayload {
    pub image: PngPayload,
    pub mask: PngPayload,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase")]
pub enum Request {
    Hello {
        version: u32,
    },
    Predict {
        id: u64,
        query: PngPayload,
        support: Vec<SupportPayload>,
    },
    Shutdown,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase")]
pub enum Response {
    Hello {
        version: u32,
        name: String,
    },
    Result {
        id: u64,
        mask: PngPayload,
    },
    Error {
        id: Option<u64>,
        message: String,
    },
}

/// Serializes a frame as one JSON line including the trailing `\n`.
pub fn to_line<T: Serialize>(frame: &T) -> String {
    let mut s = serde_json::to_string(frame).expect("protocol frames always serialize");
    s.push('\n');
    s
}
