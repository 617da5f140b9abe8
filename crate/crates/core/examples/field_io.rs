//! Round-trip a random field and a short trajectory through the text formats
//! used by the command-line tool.

use ns_certify::field::DomainSpec;
use ns_certify::field_io::{read_field_str, write_field_string};
use ns_certify::galerkin::{integrate, ProblemData, SolverConfig};
use ns_certify::random::{random_field, substream, RandomFieldSpec};
use ns_certify::trajectory::Trajectory;

fn main() -> ns_certify::Result<()> {
    let spec = RandomFieldSpec {
        max_wavenumber: 1,
        ..RandomFieldSpec::default()
    };
    let u0 = random_field(DomainSpec::default(), &spec, &mut substream(1, 0)).scale(0.1);
    let text = write_field_string(&u0);
    print!(
        "{}",
        text.lines().take(6).collect::<Vec<_>>().join("\n") + "\n...\n"
    );
    assert_eq!(read_field_str(&text)?, u0);

    let mut config = SolverConfig::new(3.0, 1e-2);
    config.sample_stride = 10;
    let traj = integrate(&ProblemData::unforced(u0.clone(), 1.0, 0.5), &config)?;
    let csv = traj.to_csv_string()?;
    print!("{csv}");
    let back = Trajectory::from_csv_str(&csv, u0)?;
    assert_eq!(back.samples, traj.samples);
    Ok(())
}
