use std::process::Command;

fn main() {
    // Bake a git-describe-style version into the binary for run manifests.
    let git = Command::new("git")
        .args(["describe", "--always", "--dirty", "--tags"])
        .output()
        .ok()
        .filter(|o| o.status.success())
        .map(|o| String::from_utf8_lossy(&o.stdout).trim().to_string())
        .unwrap_or_else(|| "unknown".to_string());
    println!("cargo:rustc-env=SEGUE_GIT_VERSION={git}");
    println!("cargo:rerun-if-changed=../../.git/HEAD");
}
