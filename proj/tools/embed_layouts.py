#!/usr/bin/env python3
"""Regenerates include/rlsp/gridworld_layouts.hpp from data/gridworlds/*.txt."""
import pathlib

root = pathlib.Path(__file__).resolve().parent.parent
names = ["room_vase", "toy_train", "batteries", "apples", "far_vase"]

out = [
    "#pragma once",
    "",
    "// Generated by tools/embed_layouts.py from data/gridworlds/. Do not edit by hand.",
    "",
    "#include <string>",
    "#include <string_view>",
    "",
    '#include "rlsp/error.hpp"',
    "",
    "namespace rlsp::layouts {",
    "",
]
for n in names:
    text = (root / "data" / "gridworlds" / f"{n}.txt").read_text()
    out.append(f'inline constexpr std::string_view {n} = R"layout({text})layout";')
    out.append("")
out.append("inline std::string_view text(const std::string& name) {")
for n in names:
    out.append(f'  if (name == "{n}") return {n};')
out.append('  throw ConfigError("unknown gridworld case \'" + name + "\'");')
out.append("}")
out.append("")
out.append("}  // namespace rlsp::layouts")
(root / "include" / "rlsp" / "gridworld_layouts.hpp").write_text("\n".join(out) + "\n")
