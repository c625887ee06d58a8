#pragma once

// CLI invocations with frozen outputs under tests/golden/, and malformed
// invocations with their expected exit codes.

#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#ifndef SOBDUB_GOLDEN_DIR
#error "SOBDUB_GOLDEN_DIR must point at tests/golden"
#endif

namespace golden {

inline const std::string kDir = SOBDUB_GOLDEN_DIR;

struct Case {
    std::string name;  // output file under kDir
    std::vector<std::string> args;
};

struct Malformed {
    std::string name;
    std::vector<std::string> args;
    int expected_exit;
};

/// Splits on spaces and substitutes @GOLDEN@ with the golden directory.
inline std::vector<std::string> argv(const std::string& line) {
    std::vector<std::string> out;
    std::istringstream in(line);
    std::string word;
    while (in >> word) {
        for (auto at = word.find("@GOLDEN@"); at != std::string::npos; at = word.find("@GOLDEN@"))
            word.replace(at, 8, kDir);
        out.push_back(word);
    }
    return out;
}

inline const std::vector<Case>& cases() {
    static const std::vector<Case> list{
        {"constants.json", argv("constants --p 2 --sigma 2 --cs 1")},
        {"constants_subelliptic.json", argv("constants --p 2 --sigma 2 --s 8 --K 1 --bign 2")},
        {"constants.csv", argv("constants --p 1.5 --sigma 3 --cs 0.5 --format csv")},
        {"doubling_lebesgue2d.json", argv("doubling --space lebesgue --dim 2 --grid 101 --radius 1")},
        {"doubling_exp.csv", argv("doubling --space exp:rate=1 --radius 1 --format csv")},
        {"chain_power.json", argv("chain --space power:alpha=1 --center 0 --radius 1 --p 2 --sigma 2")},
        {"chain_gauss2d.csv",
         argv("chain --space gauss:s=1 --dim 2 --grid 81 --center 0.2,-0.1 --radius 0.8 --format csv")},
        {"chain_table.json",
         argv("chain --space table:path=@GOLDEN@/path_points.csv,edges=@GOLDEN@/path_edges.csv "
              "--center c --radius 1.5")},
        {"estimate.json",
         argv("estimate --p 1 --sigma 2 --radius 1 --grid 121 --seed 7 --restarts 2 --iters 40")},
        {"estimate_2d.csv",
         argv("estimate --dim 2 --grid 25 --radius 1 --seed 3 --restarts 1 --iters 20 --format csv")},
        {"sweep_exp.csv", argv("sweep --space exp:rate=1 --radii 1:20:8")},
        {"sweep_centers.json",
         argv("sweep --space power:alpha=-0.5 --centers 0.5;-1;0 --radii 0.5,2 --format json")},
        {"sweep_config.csv", argv("sweep --config @GOLDEN@/sweep_config.json")},
        {"cutoff_2d.csv", argv("cutoff-check --dim 2 --grid 61 --radius 1 --format csv")},
        {"cutoff_1d.json", argv("cutoff-check --grid 401 --radius 1 --p 1")},
        {"grushin.csv", argv("grushin --grid 101 --format csv")},
        {"subelliptic.json", argv("subelliptic --grid 161 --radius 0.15")},
    };
    return list;
}

inline const std::vector<Malformed>& malformed() {
    static const std::vector<Malformed> list{
        {"no subcommand", {}, 2},
        {"unknown subcommand", argv("frobnicate"), 2},
        {"unknown flag", argv("chain --wat 3"), 2},
        {"non-numeric radius", argv("chain --radius abc"), 2},
        {"negative radius", argv("chain --radius -1"), 2},
        {"p below one", argv("chain --p 0.5"), 2},
        {"sigma at one", argv("constants --sigma 1"), 2},
        {"unknown family", argv("doubling --space cauchy"), 2},
        {"bad family parameter", argv("doubling --space power:beta=1"), 2},
        {"non-integrable power", argv("doubling --space power:alpha=-1.5"), 2},
        {"missing space file", argv("chain --space table:path=/nonexistent/points.csv"), 2},
        {"malformed space file", argv("chain --space table:path=@GOLDEN@/malformed_points.csv --center a"), 2},
        {"divergent beta", argv("constants --s 4"), 2},
        {"bad format", argv("constants --format yaml"), 2},
        {"bad grid", argv("doubling --grid 8"), 2},
        {"bad radii", argv("sweep --radii 1:2"), 2},
        {"center dimension", argv("doubling --dim 2 --center 0"), 2},
        {"missing config", argv("chain --config /nonexistent/config.json"), 2},
        {"malformed config", argv("chain --config @GOLDEN@/malformed_config.json"), 2},
        {"ball too close to boundary", argv("subelliptic --grid 101 --radius 0.5"), 2},
        {"radius below resolution", argv("chain --domain -1:1 --grid 101 --radius 0.01"), 2},
        {"help", argv("chain --help"), 0},
    };
    return list;
}

/// Maps the golden directory back to @GOLDEN@ so frozen outputs do not
/// depend on where the tree is checked out.
inline std::string normalize(std::string text) {
    for (auto at = text.find(kDir); at != std::string::npos; at = text.find(kDir, at))
        text.replace(at, kDir.size(), "@GOLDEN@");
    return text;
}

inline std::optional<std::string> read(const std::string& name) {
    std::ifstream in(kDir + "/" + name, std::ios::binary);
    if (!in) return std::nullopt;
    std::ostringstream text;
    text << in.rdbuf();
    return text.str();
}

}  // namespace golden
