// Command-line front end: dataset generation, ground truth, index build,
// search, recall/QPS sweeps, and the BQ compatibility probe.

#include <chrono>
#include <cstdio>
#include <fstream>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "qivr/builder.hpp"
#include "qivr/datasets.hpp"
#include "qivr/eval.hpp"
#include "qivr/search.hpp"
#include "qivr/store_io.hpp"

namespace {

using json = nlohmann::json;

std::vector<std::vector<uint32_t>> gt_rows(const qivr::IntMatrix& gt) {
    std::vector<std::vector<uint32_t>> rows(gt.count);
    for (size_t i = 0; i < gt.count; ++i) {
        rows[i].assign(gt.row(i).begin(), gt.row(i).end());
    }
    return rows;
}

qivr::Scorer parse_scorer(const std::string& name) {
    if (name == "sm2") return qivr::Scorer::sm2;
    if (name == "sign1") return qivr::Scorer::sign1;
    if (name == "sq2") return qivr::Scorer::sq2;
    throw CLI::ValidationError("--encoding", "expected sm2|sign1|sq2");
}

double mib(uint64_t bytes) { return static_cast<double>(bytes) / (1024.0 * 1024.0); }

int cmd_gen(const std::string& kind, size_t n, uint32_t d, uint64_t seed,
            const qivr::SyntheticLrParams& lr, const std::string& out) {
    qivr::Dataset ds;
    if (kind == "sphere") {
        ds = qivr::gen_random_sphere(n, d, seed);
    } else if (kind == "lowrank") {
        ds = qivr::gen_synthetic_lr(n, d, seed, lr);
    } else {
        throw CLI::ValidationError("--kind", "expected sphere|lowrank");
    }
    qivr::write_fvecs(out, ds.data.data(), ds.count, ds.dim);
    std::printf("gen: wrote %zu x %u (%s, seed %llu) to %s\n", ds.count, ds.dim,
                kind.c_str(), static_cast<unsigned long long>(seed), out.c_str());
    return 0;
}

int cmd_gt(const std::string& base_path, const std::string& queries_path, uint32_t k,
           const std::string& out) {
    auto base = qivr::read_fvecs(base_path);
    auto queries = qivr::read_fvecs(queries_path);
    if (base.count == 0 || queries.count == 0 || base.dim != queries.dim) {
        std::fprintf(stderr, "gt: empty input or dimension mismatch\n");
        return 1;
    }
    const uint32_t threads = std::max(1u, std::thread::hardware_concurrency());
    auto lists = qivr::brute_force_topk(base.values.data(), base.count,
                                        queries.values.data(), queries.count, base.dim,
                                        k, qivr::Scorer::float_cosine, threads);
    std::vector<int32_t> flat;
    flat.reserve(queries.count * k);
    for (const auto& row : lists) {
        for (uint32_t id : row) flat.push_back(static_cast<int32_t>(id));
    }
    qivr::write_ivecs(out, flat.data(), queries.count, k);
    std::printf("gt: wrote top-%u of %zu queries over %zu base vectors to %s\n", k,
                queries.count, base.count, out.c_str());
    return 0;
}

int cmd_build(const std::string& input, const std::string& out,
              const qivr::BuildParams& params) {
    auto vecs = qivr::read_fvecs(input);
    if (vecs.count == 0) {
        std::fprintf(stderr, "build: no vectors in %s\n", input.c_str());
        return 1;
    }
    const auto t0 = std::chrono::steady_clock::now();
    auto index = qivr::build_index(vecs.values.data(), vecs.count, vecs.dim, params);
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    qivr::save_index(index, out);
    const auto mem = qivr::memory_report(index);
    std::printf("build: %zu x %u, m=%u efc=%u alpha=%.3f threads=%u seed=%llu\n",
                index.size(), index.dim, params.m, params.ef_c,
                static_cast<double>(params.alpha), params.threads,
                static_cast<unsigned long long>(params.seed));
    std::printf("build: %.2f s; entry point %u; saved to %s\n", secs, index.entry_point,
                out.c_str());
    std::printf("memory: hot signatures %.1f MiB, hot adjacency %.1f MiB, cold %.1f MiB\n",
                mib(mem.hot_signatures_bytes), mib(mem.hot_adjacency_bytes),
                mib(mem.cold_vector_bytes));
    return 0;
}

int cmd_search(const std::string& index_path, const std::string& queries_path, uint32_t k,
               uint32_t ef, const std::string& gt_path, uint32_t threads,
               const std::string& cold) {
    const auto mode = cold == "mapped" ? qivr::ColdMode::mapped : qivr::ColdMode::eager;
    auto index = qivr::load_index(index_path, mode);
    auto queries = qivr::read_fvecs(queries_path);
    if (queries.dim != index.dim) {
        std::fprintf(stderr, "search: query dim %u does not match index dim %u\n",
                     queries.dim, index.dim);
        return 1;
    }
    qivr::SearchParams params{ef, k};
    params.validate();

    index.cold.reset_access_count();
    const auto t0 = std::chrono::steady_clock::now();
    auto results = qivr::run_query_batch(index, queries.values.data(), queries.count,
                                         params, threads);
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    const double cold_per_query =
        static_cast<double>(index.cold.access_count()) / static_cast<double>(queries.count);

    std::printf("search: %zu queries, k=%u ef=%u threads=%u cold=%s\n", queries.count, k,
                ef, threads, cold.c_str());
    std::printf("QPS %.1f, mean cold accesses/query %.1f\n",
                static_cast<double>(queries.count) / secs, cold_per_query);
    if (!gt_path.empty()) {
        auto gt = qivr::read_ivecs(gt_path);
        std::vector<std::vector<uint32_t>> ids(results.size());
        for (size_t i = 0; i < results.size(); ++i) ids[i] = results[i].ids;
        std::printf("Recall@%u %.4f\n", k, qivr::recall_at_k(ids, gt_rows(gt), k));
    } else if (queries.count <= 20) {
        for (size_t qi = 0; qi < results.size(); ++qi) {
            std::printf("q%zu:", qi);
            for (size_t i = 0; i < results[qi].ids.size(); ++i) {
                std::printf(" %u(%.4f)", results[qi].ids[i], results[qi].scores[i]);
            }
            std::printf("\n");
        }
    }
    return 0;
}

int cmd_bench(const std::string& index_path, const std::string& queries_path,
              const std::string& gt_path, uint32_t k, std::vector<uint32_t> ef_list,
              std::vector<uint32_t> thread_list, uint32_t runs,
              const std::string& json_path) {
    auto index = qivr::load_index(index_path, qivr::ColdMode::eager);
    auto queries = qivr::read_fvecs(queries_path);
    auto gt = qivr::read_ivecs(gt_path);

    auto report = qivr::bench_sweep(index, queries.values.data(), queries.count,
                                    gt_rows(gt), k, ef_list, thread_list, runs);

    std::printf("bench: %zu nodes, %zu queries, k=%u, runs=%u, threads {%u..%u}\n",
                index.size(), queries.count, k, runs, thread_list.front(),
                thread_list.back());
    std::printf("p_s %.4f, nu2 %.3f\n", report.diagnostics.p_s, report.diagnostics.nu2);
    std::printf("%6s %10s %12s %12s %10s\n", "ef", "R@k", "QPS(1t)", "QPS(mt)", "cold/q");
    for (const auto& row : report.rows) {
        std::printf("%6u %9.2f%% %12.1f %12.1f %10.1f\n", row.ef,
                    100.0 * row.recall_at_k, row.qps_1t, row.qps_mt,
                    row.mean_cold_accesses);
    }

    if (!json_path.empty()) {
        json rows = json::array();
        for (const auto& row : report.rows) {
            rows.push_back({{"ef", row.ef},
                            {"recall_at_k", row.recall_at_k},
                            {"qps_1t", row.qps_1t},
                            {"qps_mt", row.qps_mt},
                            {"mean_cold_accesses", row.mean_cold_accesses}});
        }
        json doc = {{"k", k},
                    {"rows", rows},
                    {"p_s", report.diagnostics.p_s},
                    {"nu2", report.diagnostics.nu2},
                    {"memory",
                     {{"hot_signatures_bytes", report.memory.hot_signatures_bytes},
                      {"hot_adjacency_bytes", report.memory.hot_adjacency_bytes},
                      {"cold_vector_bytes", report.memory.cold_vector_bytes}}}};
        std::ofstream out(json_path);
        out << doc.dump(2) << "\n";
    }
    return 0;
}

int cmd_probe(const std::string& input, size_t sample, uint32_t k,
              const std::string& encoding) {
    auto vecs = qivr::read_fvecs(input);
    if (vecs.count < 10000) {
        std::fprintf(stderr,
                     "probe: warning: sample of %zu vectors is below the recommended 10K\n",
                     vecs.count);
    }
    auto report = qivr::compatibility_probe(vecs.values.data(), vecs.count, vecs.dim,
                                            sample, k, parse_scorer(encoding));
    std::printf("probe: encoding=%s sample=%zu k=%u\n", encoding.c_str(),
                report.sample_size, report.k);
    std::printf("top-%u overlap with float32 ranking: %.2f%%\n", report.k,
                100.0 * report.overlap_at_k);
    std::printf("verdict: %s\n", report.go ? "go" : "no-go");
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"BQ-native vector index and evaluation harness"};
    app.require_subcommand(1);

    // gen
    std::string gen_kind, gen_out;
    size_t gen_n = 0;
    uint32_t gen_d = 0;
    uint64_t gen_seed = 42;
    qivr::SyntheticLrParams lr;
    auto* gen = app.add_subcommand("gen", "generate a dataset (fvecs)");
    gen->add_option("--kind", gen_kind, "sphere|lowrank")->required();
    gen->add_option("--n", gen_n)->required();
    gen->add_option("--d", gen_d)->required();
    gen->add_option("--seed", gen_seed)->required();
    gen->add_option("--clusters", lr.clusters);
    gen->add_option("--subdim", lr.subdim);
    gen->add_option("--eps", lr.eps);
    gen->add_option("--zipf", lr.zipf_s);
    gen->add_option("--out", gen_out)->required();

    // gt
    std::string gt_base, gt_queries, gt_out;
    uint32_t gt_k = 0;
    auto* gt = app.add_subcommand("gt", "exact ground truth (ivecs)");
    gt->add_option("--base", gt_base)->required();
    gt->add_option("--queries", gt_queries)->required();
    gt->add_option("--k", gt_k)->required();
    gt->add_option("--out", gt_out)->required();

    // build
    std::string build_input, build_out;
    qivr::BuildParams bp;
    auto* build = app.add_subcommand("build", "build an index from fvecs");
    build->add_option("--input", build_input)->required();
    build->add_option("--out", build_out)->required();
    build->add_option("--m", bp.m);
    build->add_option("--efc", bp.ef_c);
    build->add_option("--alpha", bp.alpha);
    build->add_option("--threads", bp.threads);
    build->add_option("--seed", bp.seed);

    // search
    std::string s_index, s_queries, s_gt, s_cold = "eager";
    uint32_t s_k = 0, s_ef = 0, s_threads = 1;
    auto* search = app.add_subcommand("search", "query an index");
    search->add_option("--index", s_index)->required();
    search->add_option("--queries", s_queries)->required();
    search->add_option("--k", s_k)->required();
    search->add_option("--ef", s_ef)->required();
    search->add_option("--gt", s_gt);
    search->add_option("--threads", s_threads);
    search->add_option("--cold", s_cold, "eager|mapped")
        ->check(CLI::IsMember({"eager", "mapped"}));

    // bench
    std::string b_index, b_queries, b_gt, b_json;
    uint32_t b_k = 10, b_runs = 3;
    std::vector<uint32_t> b_ef = {32, 64, 128, 256, 512, 1024};
    std::vector<uint32_t> b_threads = {1, 8};
    auto* bench = app.add_subcommand("bench", "recall/QPS sweep");
    bench->add_option("--index", b_index)->required();
    bench->add_option("--queries", b_queries)->required();
    bench->add_option("--gt", b_gt)->required();
    bench->add_option("--k", b_k)->required();
    bench->add_option("--ef", b_ef)->delimiter(',');
    bench->add_option("--threads", b_threads)->delimiter(',');
    bench->add_option("--runs", b_runs);
    bench->add_option("--json", b_json);

    // probe
    std::string p_input, p_encoding = "sm2";
    size_t p_sample = 10000;
    uint32_t p_k = 10;
    auto* probe = app.add_subcommand("probe", "BQ compatibility probe (go/no-go)");
    probe->add_option("--input", p_input)->required();
    probe->add_option("--sample", p_sample);
    probe->add_option("--k", p_k);
    probe->add_option("--encoding", p_encoding, "sm2|sign1|sq2")
        ->check(CLI::IsMember({"sm2", "sign1", "sq2"}));

    CLI11_PARSE(app, argc, argv);

    try {
        if (gen->parsed()) return cmd_gen(gen_kind, gen_n, gen_d, gen_seed, lr, gen_out);
        if (gt->parsed()) return cmd_gt(gt_base, gt_queries, gt_k, gt_out);
        if (build->parsed()) return cmd_build(build_input, build_out, bp);
        if (search->parsed()) {
            return cmd_search(s_index, s_queries, s_k, s_ef, s_gt, s_threads, s_cold);
        }
        if (bench->parsed()) {
            return cmd_bench(b_index, b_queries, b_gt, b_k, b_ef, b_threads, b_runs, b_json);
        }
        if (probe->parsed()) return cmd_probe(p_input, p_sample, p_k, p_encoding);
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
    return 0;
}
