//! Writes a synthetic disk instance plus a one-line manifest into a
//! directory, ready for `potmask run`.
//!
//! `cargo run -p potmask-core --example write_disk -- <dir> [seed]`

use std::fs;
use std::path::PathBuf;

use potmask_core::image::write_mask_pgm;
use potmask_core::io::{write_feature_file, write_weight_file};
use potmask_core::synthetic::{disk_image, DiskParams};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut args = std::env::args().skip(1);
    let dir = PathBuf::from(args.next().ok_or("usage: write_disk <dir> [seed]")?);
    let seed = args.next().map(|s| s.parse()).transpose()?.unwrap_or(7);
    fs::create_dir_all(&dir)?;
    let img = disk_image(&DiskParams {
        seed,
        ..DiskParams::default()
    });
    write_feature_file(&img.features, dir.join("disk.feat"))?;
    write_weight_file(&img.weights, dir.join("disk.w"))?;
    write_mask_pgm(&img.truth, dir.join("disk_gt.pgm"))?;
    fs::write(dir.join("manifest.txt"), "disk.feat disk.w disk disk_gt.pgm\n")?;
    println!("wrote {}", dir.join("manifest.txt").display());
    Ok(())
}
