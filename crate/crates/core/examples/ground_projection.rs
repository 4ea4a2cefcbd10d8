// From a detection box to an egocentric ground position and a heading class.
//
// cargo run --example ground_projection

use homotrack::config::PipelineConfig;
use homotrack::geometry::{
    project_to_ground, quantize_heading, refine_foot_point, relative_to_absolute_heading, Angle, BinaryMask,
    BoundingBox, GroundPoint, HeadingClass,
};

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    let cam = PipelineConfig::default().camera;
    let robot = GroundPoint::new(3.0, 0.5);
    let foot = cam.ground_to_image(robot).ok_or("robot not in view")?;
    let head = cam.world_to_image(robot.x, robot.y, 0.9).ok_or("robot not in view")?;
    let height = foot.v - head.v;

    // the detector's box stops short of the feet; the mask fills the gap
    let bbox = BoundingBox::new(foot.h - height * 0.22, head.v, height * 0.44, height * 0.9)?;
    let mut mask = BinaryMask::new(cam.image_width as usize, cam.image_height as usize);
    mask.fill_rect(foot.h - height * 0.13, head.v, foot.h + height * 0.13, foot.v);
    let refined = refine_foot_point(&mask, &bbox, 0.2 * bbox.height, 2);

    let naive = project_to_ground(bbox.bottom_center(), &cam)?;
    let better = project_to_ground(refined, &cam)?;
    println!("truth  ({:.3}, {:.3}) m", robot.x, robot.y);
    println!("box    ({:.3}, {:.3}) m", naive.x, naive.y);
    println!("mask   ({:.3}, {:.3}) m", better.x, better.y);
    assert!(better.distance(&robot) < naive.distance(&robot));

    // class 5 means "facing the camera"; convert to an absolute heading
    let class = HeadingClass::new(5)?;
    let observer = Angle::from_degrees(90.0);
    let abs = relative_to_absolute_heading(class.center(), observer, cam.bearing(refined));
    println!("class {} -> absolute heading {:.1} deg", class.index(), abs.degrees());
    assert_eq!(quantize_heading(Angle::from_degrees(175.0)).index(), 5);

    match project_to_ground(homotrack::geometry::ImagePoint::new(320.0, 0.0), &cam) {
        Err(e) => println!("top of the image: {e}"),
        Ok(p) => println!("unexpected ground point {p:?}"),
    }
    Ok(())
}

#[allow(dead_code)]
fn main() {
    run_example().expect("example failed");
}
