// Copyright 2026 The bosonic-covert Authors
// SPDX-License-Identifier: Apache-2.0

fn main() {
    std::process::exit(bosonic_covert::cli::run(std::env::args_os()));
}
