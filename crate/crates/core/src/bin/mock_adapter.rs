//! Echo adapter speaking wire protocol v1, with switches that break the
//! protocol in specific ways for exercising the client.
//!
//! Flags: --wrong-size, --gray-junk, --bad-version, --wrong-id,
//! --exit-after N, --hang-after N, --noise (non-JSON line before each reply).

use std::io::{self, BufRead, Write};

use jfs_core::fss::wire::{self, PngPayload, Request, Response, PROTOCOL_VERSION};
use jfs_core::fss::{echo_predict, resample_nearest, SupportPair};
use jfs_core::dataio::encode_mask_png;
use jfs_core::maskcore::BinaryMask;
use jfs_core::raster::RgbImage;

#[derive(Default)]
struct Faults {
    wrong_size: bool,
    gray_junk: bool,
    bad_version: bool,
    wrong_id: bool,
    noise: bool,
    exit_after: Option<u64>,
    hang_after: Option<u64>,
}

fn parse_args() -> Faults {
    let mut f = Faults::default();
    let mut args = std::env::args().skip(1);
    while let Some(a) = args.next() {
        let mut count = || args.next().and_then(|v| v.parse().ok()).expect("count argument");
        match a.as_str() {
            "--wrong-size" => f.wrong_size = true,
            "--gray-junk" => f.gray_junk = true,
            "--bad-version" => f.bad_version = true,
            "--wrong-id" => f.wrong_id = true,
            "--noise" => f.noise = true,
            "--exit-after" => f.exit_after = Some(count()),
            "--hang-after" => f.hang_after = Some(count()),
            "--echo" => {}
            other => {
                eprintln!("mock adapter: unknown flag {other}");
                std::process::exit(2);
            }
        }
    }
    f
}

fn gray_png(w: u32, h: u32, value: u8) -> Vec<u8> {
    let mut out = Vec::new();
    let mut enc = png::Encoder::new(&mut out, w, h);
    enc.set_color(png::ColorType::Grayscale);
    enc.set_depth(png::BitDepth::Eight);
    let mut writer = enc.write_header().expect("png header");
    writer
        .write_image_data(&vec![value; (w * h) as usize])
        .expect("png data");
    writer.finish().expect("png finish");
    out
}

fn answer(
    faults: &Faults,
    id: u64,
    query: &PngPayload,
    support: &[wire::SupportPayload],
) -> Result<Response, String> {
    let query: RgbImage = query.to_image().map_err(|e| e.to_string())?;
    let first = support.first().ok_or("empty support set")?;
    let image = first.image.to_image().map_err(|e| e.to_string())?;
    let mask = first.mask.to_mask().map_err(|e| e.to_string())?;
    let pair = SupportPair::new(&image, &mask).map_err(|e| e.to_string())?;
    let (w, h) = query.dims();
    let png = if faults.gray_junk {
        gray_png(w, h, 128)
    } else if faults.wrong_size {
        encode_mask_png(&resample_nearest(&mask, w + 1, h))
    } else {
        let out: BinaryMask = echo_predict(&query, &[pair]);
        encode_mask_png(&out)
    };
    use base64::Engine;
    Ok(Response::Result {
        id: if faults.wrong_id { id + 1000 } else { id },
        mask: PngPayload {
            png_b64: base64::engine::general_purpose::STANDARD.encode(png),
        },
    })
}

fn main() {
    let faults = parse_args();
    let stdin = io::stdin();
    let mut stdout = io::stdout().lock();
    let mut served = 0u64;
    for line in stdin.lock().lines() {
        let Ok(line) = line else { break };
        let reply = match serde_json::from_str::<Request>(&line) {
            Err(e) => Response::Error {
                id: None,
                message: format!("malformed request: {e}"),
            },
            Ok(Request::Shutdown) => return,
            Ok(Request::Hello { .. }) => Response::Hello {
                version: if faults.bad_version { PROTOCOL_VERSION + 1 } else { PROTOCOL_VERSION },
                name: "mock-adapter/echo".into(),
            },
            Ok(Request::Predict { id, query, support }) => {
                if faults.exit_after == Some(served) {
                    std::process::exit(3);
                }
                if faults.hang_after == Some(served) {
                    std::thread::sleep(std::time::Duration::from_secs(3600));
                }
                served += 1;
                answer(&faults, id, &query, &support).unwrap_or_else(|message| Response::Error {
                    id: Some(id),
                    message,
                })
            }
        };
        if faults.noise {
            let _ = stdout.write_all(b"not json\n");
        }
        if stdout
            .write_all(wire::to_line(&reply).as_bytes())
            .and_then(|_| stdout.flush())
            .is_err()
        {
            return;
        }
    }
}
