//! Reading and writing the dataset files, and what a malformed file reports.

use bezier_trunk::camera::CameraIntrinsics;
use bezier_trunk::depth::DepthMap;
use bezier_trunk::formats::{
    parse_annotations, parse_depth, parse_intrinsics, write_annotations, write_depth, write_intrinsics,
    AnnotationRecord, DepthFormat,
};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let dir = std::env::temp_dir().join("bezier_trunk_file_formats");
    std::fs::create_dir_all(&dir)?;

    let ann = vec![AnnotationRecord {
        image_id: "orchard_01".into(),
        bbox: [90.0, 30.0, 170.0, 410.0],
        keypoints: vec![[100.0, 400.0], [128.0, 310.0], [131.0, 215.0], [150.0, 120.0], [150.0, 40.0]],
    }];
    let path = dir.join("annotations.jsonl");
    write_annotations(&ann, &path)?;
    println!("{}:\n{}", path.display(), std::fs::read_to_string(&path)?.trim_end());
    assert_eq!(parse_annotations(&path)?, ann);

    let k = CameraIntrinsics::new(500.0, 500.0, 320.0, 240.0, 640, 480)?;
    let kpath = dir.join("camera.txt");
    write_intrinsics(&k, &kpath)?;
    assert_eq!(parse_intrinsics(&kpath)?, k);

    // files store float32, so use values float32 holds exactly
    let mut depth = DepthMap::from_fn(64, 48, |c, r| (1.0 + 0.01 * c as f32 + 0.02 * r as f32) as f64)?;
    depth.invalidate(3, 4);
    for format in [DepthFormat::Pfm, DepthFormat::Raw] {
        let p = dir.join(if format == DepthFormat::Pfm { "depth.pfm" } else { "depth.raw" });
        write_depth(&depth, &p, format)?;
        let back = parse_depth(&p)?;
        println!("{}: {}x{}, {} valid pixels, round trip equal: {}", p.display(), back.width(), back.height(), back.valid_count(), back == depth);
    }

    let bad = dir.join("bad.jsonl");
    std::fs::write(&bad, "{\"image_id\":\"a\",\"bbox\":[0,0,10,10],\"keypoints\":[[1,2],[3,4]]}\n{\"image_id\":\"b\",\"bbox\":[9,0,1,10],\"keypoints\":[[1,2],[3,4]]}\n")?;
    match parse_annotations(&bad) {
        Err(e) => println!("malformed file: {e}"),
        Ok(_) => println!("unexpectedly accepted"),
    }
    Ok(())
}
