#include <gtest/gtest.h>
#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
    const fs::path p = fs::temp_directory_path() / ("impstrip_cli_test_" + name);
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
}

void write(const fs::path& p, const std::string& text) { std::ofstream(p) << text; }

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

// exit status of the CLI; stderr goes to dir/stderr.txt
int run(const fs::path& dir, const std::string& args) {
    const std::string cmd = std::string("\"") + IMPSTRIP_CLI + "\" " + args + " > \"" + (dir / "stdout.txt").string() +
                            "\" 2> \"" + (dir / "stderr.txt").string() + "\"";
    const int st = std::system(cmd.c_str());
    return WIFEXITED(st) ? WEXITSTATUS(st) : -1;
}

std::vector<std::vector<std::string>> read_csv(const fs::path& p) {
    std::vector<std::vector<std::string>> rows;
    std::ifstream in(p);
    std::string line;
    while (std::getline(in, line)) {
        std::vector<std::string> row;
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) row.push_back(cell);
        if (!line.empty() && line.back() == ',') row.push_back("");
        rows.push_back(row);
    }
    return rows;
}

std::string first_line(const fs::path& p) {
    std::ifstream in(p);
    std::string line;
    std::getline(in, line);
    return line;
}

}  // namespace

TEST(Cli, MalformedConfigIsConfigError) {
    const auto d = scratch("malformed");
    write(d / "c.json", "{ \"k0\": [2.0, ");
    EXPECT_EQ(run(d, "solve --config " + (d / "c.json").string() + " --out " + (d / "o").string()), 2);
}

TEST(Cli, UnknownKeyIsConfigError) {
    const auto d = scratch("unknown");
    write(d / "c.json", R"({"N": 16, "colour": "blue"})");
    EXPECT_EQ(run(d, "solve --config " + (d / "c.json").string() + " --out " + (d / "o").string()), 2);
    EXPECT_NE(slurp(d / "stderr.txt").find("colour"), std::string::npos);
}

TEST(Cli, ActiveImpedanceRejected) {
    const auto d = scratch("active");
    write(d / "c.json", R"({"eta": [1.0, 0.5]})");
    EXPECT_EQ(run(d, "solve --config " + (d / "c.json").string() + " --out " + (d / "o").string()), 2);
    EXPECT_NE(slurp(d / "stderr.txt").find("dissipation"), std::string::npos);
}

TEST(Cli, MissingSubcommandOrBadFlag) {
    const auto d = scratch("flags");
    EXPECT_EQ(run(d, ""), 2);
    EXPECT_EQ(run(d, "verify --suite medium"), 2);
    EXPECT_EQ(run(d, "sweep --param colour --values 1,2 --out " + (d / "o").string()), 2);
}

TEST(Cli, SolveWritesTablesAndHardStripHasNoSymmetricPart) {
    const auto d = scratch("solve");
    write(d / "c.json", R"({"N": 32, "eta": [0.0, 0.0], "theta_count": 13})");
    ASSERT_EQ(run(d, "solve --config " + (d / "c.json").string() + " --out " + (d / "o").string()), 0);
    const auto rows = read_csv(d / "o" / "directivity.csv");
    ASSERT_EQ(rows.size(), 14u);
    EXPECT_EQ(first_line(d / "o" / "directivity.csv"), "theta_deg,S_re,S_im,Sa_re,Sa_im,Ss_re,Ss_im");
    for (std::size_t i = 1; i < rows.size(); ++i) {
        ASSERT_EQ(rows[i].size(), 7u);
        EXPECT_LT(std::abs(std::stod(rows[i][5])), 1e-12);
        EXPECT_LT(std::abs(std::stod(rows[i][6])), 1e-12);
    }
    EXPECT_EQ(first_line(d / "o" / "densities.csv"), "parity,n,re,im");
    EXPECT_EQ(read_csv(d / "o" / "densities.csv").size(), 65u);
    const std::string diag = slurp(d / "o" / "diagnostics.json");
    EXPECT_NE(diag.find("\"config_hash\""), std::string::npos);
    EXPECT_NE(diag.find("\"bc_residual\""), std::string::npos);
}

TEST(Cli, SolveIsReproducible) {
    const auto d = scratch("repro");
    write(d / "c.json", R"({"N": 32, "theta_count": 19})");
    ASSERT_EQ(run(d, "solve --config " + (d / "c.json").string() + " --out " + (d / "r1").string()), 0);
    ASSERT_EQ(run(d, "solve --config " + (d / "c.json").string() + " --out " + (d / "r2").string() + " --threads 3"), 0);
    for (const char* f : {"directivity.csv", "densities.csv"}) EXPECT_EQ(slurp(d / "r1" / f), slurp(d / "r2" / f)) << f;
}

TEST(Cli, SpectraTableHasZeroRow) {
    const auto d = scratch("spectra");
    write(d / "c.json", R"({"N": 32, "k_min": -1.0, "k_max": 1.0, "k_count": 3})");
    ASSERT_EQ(run(d, "spectra --config " + (d / "c.json").string() + " --out " + (d / "o").string()), 0);
    const auto rows = read_csv(d / "o" / "spectra.csv");
    ASSERT_EQ(rows.size(), 4u);
    EXPECT_EQ(first_line(d / "o" / "spectra.csv"),
              "k_re,k_im,Um_re,Um_im,U0_re,U0_im,Up_re,Up_im,U0t_re,U0t_im,"
              "Vm_re,Vm_im,V0_re,V0_im,Vp_re,Vp_im,V0t_re,V0t_im,residual");
    EXPECT_EQ(std::stod(rows[2][0]), 0.0);
    EXPECT_LT(std::stod(rows[2].back()), 1e-4);
}

TEST(Cli, SpectraNeedAbsorption) {
    const auto d = scratch("spectra_lossless");
    write(d / "c.json", R"({"N": 16, "k0": [2.0, 0.0]})");
    EXPECT_EQ(run(d, "spectra --config " + (d / "c.json").string() + " --out " + (d / "o").string()), 2);
}

TEST(Cli, SweepFlagsDeformation) {
    const auto d = scratch("sweep");
    write(d / "c.json", R"({"N": 32, "theta_count": 7})");
    ASSERT_EQ(run(d, "sweep --param eta_re --values -1,1 --config " + (d / "c.json").string() + " --out " +
                         (d / "o").string()),
              0);
    const auto rows = read_csv(d / "o" / "summary.csv");
    ASSERT_EQ(rows.size(), 3u);
    EXPECT_EQ(first_line(d / "o" / "summary.csv"),
              "value,status,forward_re,forward_im,scattered_power,c_plus_re,c_plus_im,c_minus_re,c_minus_im,"
              "d_plus_re,d_plus_im,d_minus_re,d_minus_im,deformation_needed,sigma3_over_sigma1_a,sigma3_over_sigma1_s");
    EXPECT_EQ(rows[1][1], "ok");
    EXPECT_EQ(rows[1][13], "1");
    EXPECT_EQ(rows[2][13], "0");
    EXPECT_TRUE(fs::exists(d / "o" / "directivity_0.csv"));
    EXPECT_TRUE(fs::exists(d / "o" / "directivity_1.csv"));
}

TEST(Cli, SweepReportsBadPointsInline) {
    const auto d = scratch("sweep_bad");
    write(d / "c.json", R"({"N": 32, "theta_count": 7})");
    ASSERT_EQ(run(d, "sweep --param eta_im --values -1,0.5 --config " + (d / "c.json").string() + " --out " +
                         (d / "o").string()),
              0);
    const auto rows = read_csv(d / "o" / "summary.csv");
    ASSERT_EQ(rows.size(), 3u);
    EXPECT_EQ(rows[1][1], "ok");
    EXPECT_EQ(rows[2][1].rfind("error", 0), 0u);
}
