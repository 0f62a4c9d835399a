#include <doctest.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <random>
#include <regex>
#include <sstream>
#include <string>
#include <vector>

namespace fs = std::filesystem;

namespace {

const std::string kCli = DRMEA_CLI_PATH;

int run(const std::string& args, const std::string& stdout_path = "") {
    static const std::string stderr_path =
        (fs::temp_directory_path() / "drmea_cli_test_stderr.txt").string();
    std::string cmd = kCli + " " + args;
    if (!stdout_path.empty()) cmd += " > " + stdout_path;
    cmd += " 2> " + stderr_path;
    const int status = std::system(cmd.c_str());
    return WEXITSTATUS(status);
}

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    REQUIRE(in.good());
    return std::string(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

std::size_t count_lines(const std::string& text) {
    std::size_t n = 0;
    for (char ch : text)
        if (ch == '\n') ++n;
    return n;
}

struct TempDir {
    explicit TempDir(std::string p) : path(std::move(p)) { fs::remove_all(path); }
    ~TempDir() { fs::remove_all(path); }
    std::string path;
};

void make_tiny_data(const std::string& dir, int seed = 5) {
    REQUIRE(run("gen-data --classes 2 --dim 4 --n-source 15 --n-target 15 --rotation 25 "
                "--shift 0.3 --noise 0.5 --seed " +
                std::to_string(seed) + " --out " + dir) == 0);
}

std::string tiny_config() {
    return "dims = 6,4\nbatch_size = 6\nepochs = 2\nlr = 0.001\nseed = 3\n";
}

}  // namespace

TEST_CASE("gen-data writes a consistent dataset layout") {
    TempDir dir("cli_gen_tmp");
    make_tiny_data(dir.path);
    const std::string source = read_file(dir.path + "/source.csv");
    const std::string target = read_file(dir.path + "/target.csv");
    const std::string labels = read_file(dir.path + "/target_labels.csv");
    CHECK(count_lines(source) == 30);
    CHECK(count_lines(target) == 30);
    CHECK(count_lines(labels) == 30);
    const std::string meta = read_file(dir.path + "/metadata.jsonl");
    CHECK(count_lines(meta) == 2);
    CHECK(meta.find("\"domain_tag\":\"source\"") != std::string::npos);
    CHECK(meta.find("\"rng\":\"mt19937_64/u53/box-muller\"") != std::string::npos);
}

TEST_CASE("gen-data is idempotent for a fixed seed") {
    TempDir a("cli_gen_a"), b("cli_gen_b");
    make_tiny_data(a.path, 77);
    make_tiny_data(b.path, 77);
    CHECK(read_file(a.path + "/source.csv") == read_file(b.path + "/source.csv"));
    CHECK(read_file(a.path + "/target.csv") == read_file(b.path + "/target.csv"));
    CHECK(read_file(a.path + "/metadata.jsonl") == read_file(b.path + "/metadata.jsonl"));
    // Overwrite in place: same bytes again.
    make_tiny_data(a.path, 77);
    CHECK(read_file(a.path + "/source.csv") == read_file(b.path + "/source.csv"));
}

TEST_CASE("train runs a source-only ablation and writes the run directory") {
    TempDir data("cli_data_tmp"), run_dir("cli_run_tmp");
    make_tiny_data(data.path);
    std::ofstream("cli_config_tmp.txt") << tiny_config();
    CHECK(run("train --config cli_config_tmp.txt --data " + data.path + " --out " + run_dir.path +
              " --ablation source-only") == 0);
    CHECK(fs::exists(run_dir.path + "/epochs.csv"));
    CHECK(fs::exists(run_dir.path + "/model_final"));

    const std::string resolved = read_file(run_dir.path + "/config.resolved");
    CHECK(resolved.find("ablation = source-only") != std::string::npos);
    CHECK(resolved.find("lambda1 = 0") != std::string::npos);
    CHECK(resolved.find("d_prime = 5") != std::string::npos);  // batch_size - 1
    CHECK(resolved.find("optimizer = adam") != std::string::npos);
    CHECK(resolved.find("k = 1") != std::string::npos);
    fs::remove("cli_config_tmp.txt");
}

TEST_CASE("no-al runs keep the al column at zero while full runs activate it") {
    TempDir data("cli_data_al"), run_full("cli_run_full"), run_noal("cli_run_noal");
    make_tiny_data(data.path);
    std::ofstream("cli_config_al.txt") << tiny_config() << "intra_start_epoch = 0\n";
    REQUIRE(run("train --config cli_config_al.txt --data " + data.path + " --out " +
                run_full.path) == 0);
    REQUIRE(run("train --config cli_config_al.txt --data " + data.path + " --out " +
                run_noal.path + " --ablation no-al") == 0);

    auto al_column = [](const std::string& csv) {
        std::vector<double> vals;
        std::istringstream ss(csv);
        std::string line;
        std::getline(ss, line);  // header
        while (std::getline(ss, line)) {
            std::istringstream row(line);
            std::string field;
            for (int i = 0; i <= 6; ++i) std::getline(row, field, ',');
            vals.push_back(std::stod(field));
        }
        return vals;
    };
    std::vector<double> full_al = al_column(read_file(run_full.path + "/epochs.csv"));
    std::vector<double> noal_al = al_column(read_file(run_noal.path + "/epochs.csv"));
    bool full_active = false;
    for (double v : full_al)
        if (v != 0.0) full_active = true;
    CHECK(full_active);
    for (double v : noal_al) CHECK(v == 0.0);
    fs::remove("cli_config_al.txt");
}

TEST_CASE("eval scores a saved model") {
    TempDir data("cli_data_eval"), run_dir("cli_run_eval");
    make_tiny_data(data.path);
    std::ofstream("cli_config_eval.txt") << tiny_config();
    REQUIRE(run("train --config cli_config_eval.txt --data " + data.path + " --out " +
                run_dir.path + " --ablation source-only") == 0);
    CHECK(run("eval --model " + run_dir.path + "/model_final --data " + data.path +
              "/source.csv", "cli_eval_out.txt") == 0);
    const std::string out = read_file("cli_eval_out.txt");
    CHECK(out.find("accuracy") != std::string::npos);
    CHECK(out.find("mean class accuracy") != std::string::npos);
    fs::remove("cli_config_eval.txt");
    fs::remove("cli_eval_out.txt");
}

TEST_CASE("analyze-dprime emits the curve, the marker chart and a recommendation") {
    TempDir data("cli_data_dp"), out("cli_out_dp");
    REQUIRE(run("gen-data --classes 2 --dim 12 --n-source 60 --n-target 60 --noise 0.3 "
                "--seed 9 --out " +
                data.path) == 0);
    REQUIRE(run("analyze-dprime --source " + data.path + "/source.csv --target " + data.path +
                "/target.csv --batch-size 8 --trials 3 --delta 0.05 --seed 2 --out " + out.path,
                "cli_dp_out.txt") == 0);

    const std::string csv = read_file(out.path + "/dprime_curve.csv");
    CHECK(count_lines(csv) == 8);  // header + 7 rows for batch size 8
    CHECK(csv.rfind("d_prime,mean_error_index,mean_gap_s,mean_gap_t\n", 0) == 0);
    CHECK(fs::exists(out.path + "/dprime_curve.svg"));
    const std::string rec = read_file(out.path + "/recommendation.txt");
    CHECK(rec.find("recommended_d_prime=") != std::string::npos);
    const std::string printed = read_file("cli_dp_out.txt");
    CHECK(printed.find("recommended_d_prime=") != std::string::npos);

    // Same seed: identical bytes, SVG included.
    TempDir out2("cli_out_dp2");
    REQUIRE(run("analyze-dprime --source " + data.path + "/source.csv --target " + data.path +
                "/target.csv --batch-size 8 --trials 3 --delta 0.05 --seed 2 --out " + out2.path) ==
            0);
    CHECK(read_file(out2.path + "/dprime_curve.csv") == csv);
    CHECK(read_file(out2.path + "/dprime_curve.svg") == read_file(out.path + "/dprime_curve.svg"));
    fs::remove("cli_dp_out.txt");
}

TEST_CASE("report renders charts whose axes cover the data extrema") {
    TempDir data("cli_data_rep"), run_dir("cli_run_rep"), rep("cli_rep_out");
    make_tiny_data(data.path);
    std::ofstream("cli_config_rep.txt") << tiny_config() << "epochs = 3\n";
    REQUIRE(run("train --config cli_config_rep.txt --data " + data.path + " --out " +
                run_dir.path) == 0);
    REQUIRE(run("report --run " + run_dir.path + " --out " + rep.path, "cli_rep_stdout.txt") == 0);
    CHECK(fs::exists(rep.path + "/losses.svg"));
    CHECK(fs::exists(rep.path + "/accuracy.svg"));
    const std::string summary = read_file(rep.path + "/summary.txt");
    CHECK(summary.find("ablation=none") != std::string::npos);
    CHECK(summary.find("final_src_acc=") != std::string::npos);

    // Parse-back: every polyline point stays inside the plot box, and the
    // y-axis labels equal the data extrema of the plotted series.
    const std::string svg = read_file(rep.path + "/accuracy.svg");
    std::regex num_pair("([0-9.]+),([0-9.]+)");
    std::smatch m;
    std::string::const_iterator cursor = svg.cbegin();
    std::regex points_attr("points=\"([^\"]*)\"");
    while (std::regex_search(cursor, svg.cend(), m, points_attr)) {
        const std::string pts = m[1];
        std::string::const_iterator pc = pts.cbegin();
        std::smatch pm;
        while (std::regex_search(pc, pts.cend(), pm, num_pair)) {
            const double px = std::stod(pm[1]);
            const double py = std::stod(pm[2]);
            CHECK(px >= 70.0 - 1e-9);
            CHECK(px <= 610.0 + 1e-9);
            CHECK(py >= 50.0 - 1e-9);
            CHECK(py <= 370.0 + 1e-9);
            pc = pm.suffix().first;
        }
        cursor = m.suffix().first;
    }

    std::vector<double> acc_values;
    {
        std::istringstream ss(read_file(run_dir.path + "/epochs.csv"));
        std::string line;
        std::getline(ss, line);
        while (std::getline(ss, line)) {
            std::istringstream row(line);
            std::string field;
            std::vector<std::string> fields;
            while (std::getline(row, field, ',')) fields.push_back(field);
            acc_values.push_back(std::stod(fields[8]));   // src_acc
            acc_values.push_back(std::stod(fields[9]));   // tgt_acc
            acc_values.push_back(std::stod(fields[10]));  // tgt_mean_class_acc
        }
    }
    double lo = acc_values[0], hi = acc_values[0];
    for (double v : acc_values) {
        lo = std::min(lo, v);
        hi = std::max(hi, v);
    }
    char lo_text[40], hi_text[40];
    std::snprintf(lo_text, sizeof(lo_text), "%.6g", lo);
    std::snprintf(hi_text, sizeof(hi_text), "%.6g", hi);
    CHECK(svg.find(std::string(">") + lo_text + "</text>") != std::string::npos);
    CHECK(svg.find(std::string(">") + hi_text + "</text>") != std::string::npos);

    fs::remove("cli_config_rep.txt");
    fs::remove("cli_rep_stdout.txt");
}

TEST_CASE("report fails with exit 3 when epochs.csv is missing or empty") {
    TempDir run_dir("cli_run_empty"), rep("cli_rep_empty");
    fs::create_directories(run_dir.path);
    CHECK(run("report --run " + run_dir.path + " --out " + rep.path) == 3);
    std::ofstream(run_dir.path + "/epochs.csv") << "";
    CHECK(run("report --run " + run_dir.path + " --out " + rep.path) == 3);
}

TEST_CASE("unknown flags and missing subcommands exit with code 2") {
    CHECK(run("train --bogus-flag 1") == 2);
    CHECK(run("") == 2);
    CHECK(run("gen-data --classes 1 --out cli_bad_gen") == 2);  // config error downstream
    fs::remove_all("cli_bad_gen");
}

TEST_CASE("missing input files exit with code 3") {
    CHECK(run("train --source missing.csv --target missing2.csv --out cli_run_missing") == 3);
    CHECK(run("eval --model nope.model --data nope.csv") == 3);
    fs::remove_all("cli_run_missing");
}

TEST_CASE("help output enumerates every flag with its default") {
    REQUIRE(run("train --help", "cli_help_train.txt") == 0);
    const std::string train_help = read_file("cli_help_train.txt");
    for (const char* flag : {"--config", "--data", "--source", "--target", "--target-labels",
                             "--out", "--ablation"})
        CHECK(train_help.find(flag) != std::string::npos);
    CHECK(train_help.find("none") != std::string::npos);  // ablation default echoed

    REQUIRE(run("gen-data --help", "cli_help_gen.txt") == 0);
    const std::string gen_help = read_file("cli_help_gen.txt");
    for (const char* flag : {"--classes", "--dim", "--n-source", "--n-target", "--rotation",
                             "--shift", "--noise", "--seed", "--out"})
        CHECK(gen_help.find(flag) != std::string::npos);
    CHECK(gen_help.find("45") != std::string::npos);  // rotation default

    REQUIRE(run("analyze-dprime --help", "cli_help_dp.txt") == 0);
    const std::string dp_help = read_file("cli_help_dp.txt");
    for (const char* flag : {"--source", "--target", "--batch-size", "--trials", "--delta",
                             "--seed", "--out"})
        CHECK(dp_help.find(flag) != std::string::npos);

    REQUIRE(run("report --help", "cli_help_rep.txt") == 0);
    const std::string rep_help = read_file("cli_help_rep.txt");
    CHECK(rep_help.find("--run") != std::string::npos);
    CHECK(rep_help.find("--out") != std::string::npos);

    for (const char* f : {"cli_help_train.txt", "cli_help_gen.txt", "cli_help_dp.txt",
                          "cli_help_rep.txt"})
        fs::remove(f);
}

TEST_CASE("analyze-dprime recovers a planted dominant direction") {
    TempDir dir("cli_planted");
    fs::create_directories(dir.path);
    // One strong direction over a weak tail: the error-index minimum sits at 1.
    std::vector<double> scales{6.0, 0.45, 0.42, 0.4, 0.38, 0.35, 0.3, 0.28, 0.25, 0.22, 0.2, 0.18};
    std::mt19937_64 engine(55);
    auto gaussian = [&engine]() {
        const double u1 = static_cast<double>(engine() >> 11) * 0x1.0p-53 + 1e-18;
        const double u2 = static_cast<double>(engine() >> 11) * 0x1.0p-53;
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586 * u2);
    };
    for (const char* name : {"/src.csv", "/tgt.csv"}) {
        std::ofstream out(dir.path + name);
        for (int row = 0; row < 2000; ++row) {
            for (std::size_t i = 0; i < scales.size(); ++i)
                out << (i ? "," : "") << scales[i] * gaussian();
            out << "\n";
        }
    }
    REQUIRE(run("analyze-dprime --source " + dir.path + "/src.csv --source-labeled false "
                "--target " + dir.path + "/tgt.csv --batch-size 24 --trials 30 --seed 6 --out " +
                dir.path + "/out") == 0);
    const std::string rec = read_file(dir.path + "/out/recommendation.txt");
    CHECK(rec.find("recommended_d_prime=1 ") != std::string::npos);
}

TEST_CASE("a diverging run aborts with exit code 4") {
    TempDir data("cli_data_diverge"), run_dir("cli_run_diverge");
    make_tiny_data(data.path);
    // An absurd learning rate overflows the parameters after one step.
    std::ofstream("cli_config_diverge.txt") << "dims = 6,4\nbatch_size = 6\nepochs = 1\n"
                                            << "lr = 1e200\nseed = 3\n";
    CHECK(run("train --config cli_config_diverge.txt --data " + data.path + " --out " +
              run_dir.path + " --ablation source-only") == 4);
    fs::remove("cli_config_diverge.txt");
}

TEST_CASE("training runs are idempotent byte-for-byte") {
    TempDir data("cli_data_idem"), run_dir("cli_run_idem");
    make_tiny_data(data.path);
    std::ofstream("cli_config_idem.txt") << tiny_config();
    REQUIRE(run("train --config cli_config_idem.txt --data " + data.path + " --out " +
                run_dir.path) == 0);
    const std::string first = read_file(run_dir.path + "/epochs.csv");
    const std::string first_model = read_file(run_dir.path + "/model_final");
    REQUIRE(run("train --config cli_config_idem.txt --data " + data.path + " --out " +
                run_dir.path) == 0);
    CHECK(read_file(run_dir.path + "/epochs.csv") == first);
    CHECK(read_file(run_dir.path + "/model_final") == first_model);
    fs::remove("cli_config_idem.txt");
}
