// Command-line front end. Talks to the library exclusively through the C API
// so the binary exercises the same surface third-party callers get.
//
// Exit codes: 0 success, 2 usage/config error, 3 math failure (domain or
// no-convergence), 4 solution blow-up, 5 I/O failure, 1 internal error.
#include "kdvbs/kdvbs.h"

#include "CLI11.hpp"

#include <atomic>
#include <climits>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <numbers>
#include <optional>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <thread>
#include <utility>
#include <vector>

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

// ----------------------------------------------------------------- errors

struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct IoError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct ApiError : std::runtime_error {
    kdvbs_status status;
    ApiError(kdvbs_status st, const std::string& what)
        : std::runtime_error(what), status(st) {}
};

void check(kdvbs_status st) {
    if (st == KDVBS_OK) return;
    throw ApiError(st, kdvbs_last_error());
}

int exit_code_for(kdvbs_status st) {
    switch (st) {
    case KDVBS_OK: return 0;
    case KDVBS_INVALID_ARGUMENT: return 2;
    case KDVBS_DOMAIN_ERROR: return 3;
    case KDVBS_NO_CONVERGENCE: return 3;
    case KDVBS_BLOWUP: return 4;
    case KDVBS_IO_ERROR: return 5;
    default: return 1;
    }
}

// ------------------------------------------------------------- formatting

std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.12g", v);
    return buf;
}

// Metadata header: full effective config plus the library version, so a CSV
// is self-describing and reruns are byte-comparable.
std::string meta_line(const std::string& command,
                      const std::vector<std::pair<std::string, std::string>>& kv) {
    std::ostringstream out;
    out << "# kdvbs " << kdvbs_version() << " command=" << command;
    for (const auto& [k, v] : kv) out << ' ' << k << '=' << v;
    out << '\n';
    return out.str();
}

// ------------------------------------------------------------------ output

void write_file(const std::filesystem::path& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
    out << content;
    out.flush();
    if (!out.good()) throw IoError("write failed for '" + path.string() + "'");
}

// Every command prints its primary CSV to stdout; --out additionally stores
// the artifacts (and any secondary files) in the given directory.
void emit(const std::string& out_dir, const std::string& filename,
          const std::string& content, bool to_stdout = true) {
    if (to_stdout) std::fputs(content.c_str(), stdout);
    if (out_dir.empty()) return;
    std::error_code ec;
    std::filesystem::create_directories(out_dir, ec);
    if (ec) throw IoError("cannot create directory '" + out_dir + "': " + ec.message());
    write_file(std::filesystem::path(out_dir) / filename, content);
}

// ----------------------------------------------------------- RAII handles

struct KernelHandle {
    kdvbs_kernel* p = nullptr;
    KernelHandle() = default;
    KernelHandle(const KernelHandle&) = delete;
    KernelHandle& operator=(const KernelHandle&) = delete;
    KernelHandle(KernelHandle&& o) noexcept : p(std::exchange(o.p, nullptr)) {}
    KernelHandle& operator=(KernelHandle&& o) noexcept {
        if (this != &o) {
            kdvbs_kernel_free(p);
            p = std::exchange(o.p, nullptr);
        }
        return *this;
    }
    ~KernelHandle() { kdvbs_kernel_free(p); }
};

struct TraceHandle {
    kdvbs_sim_trace* p = nullptr;
    TraceHandle() = default;
    TraceHandle(const TraceHandle&) = delete;
    TraceHandle& operator=(const TraceHandle&) = delete;
    ~TraceHandle() { kdvbs_sim_trace_free(p); }
};

struct EigHandle {
    kdvbs_eig_list* p = nullptr;
    EigHandle() = default;
    EigHandle(const EigHandle&) = delete;
    EigHandle& operator=(const EigHandle&) = delete;
    ~EigHandle() { kdvbs_eig_list_free(p); }
};

// ------------------------------------------------------------ config file

// Flat key=value text; '#' starts a comment; keys mirror the long flag names
// with '-' replaced by '_'. Explicit command-line flags win over the file.
std::map<std::string, std::string> read_kv_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw UsageError("cannot read config file '" + path + "'");
    std::map<std::string, std::string> kv;
    std::string line;
    int lineno = 0;
    auto trim = [](std::string s) {
        const char* ws = " \t\r";
        const size_t a = s.find_first_not_of(ws);
        if (a == std::string::npos) return std::string();
        const size_t b = s.find_last_not_of(ws);
        return s.substr(a, b - a + 1);
    };
    while (std::getline(in, line)) {
        ++lineno;
        const size_t hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        const size_t eq = line.find('=');
        if (eq == std::string::npos)
            throw UsageError(path + ":" + std::to_string(lineno) +
                             ": expected key=value");
        const std::string key = trim(line.substr(0, eq));
        const std::string val = trim(line.substr(eq + 1));
        if (key.empty()) throw UsageError(path + ":" + std::to_string(lineno) +
                                          ": empty key");
        if (!kv.emplace(key, val).second)
            throw UsageError(path + ":" + std::to_string(lineno) +
                             ": duplicate key '" + key + "'");
    }
    return kv;
}

double parse_double(const std::string& key, const std::string& val) {
    size_t pos = 0;
    double v = 0.0;
    try {
        v = std::stod(val, &pos);
    } catch (const std::exception&) {
        throw UsageError("config key '" + key + "': '" + val + "' is not a number");
    }
    if (pos != val.size())
        throw UsageError("config key '" + key + "': '" + val + "' is not a number");
    return v;
}

long parse_long(const std::string& key, const std::string& val) {
    size_t pos = 0;
    long v = 0;
    try {
        v = std::stol(val, &pos);
    } catch (const std::exception&) {
        throw UsageError("config key '" + key + "': '" + val + "' is not an integer");
    }
    if (pos != val.size())
        throw UsageError("config key '" + key + "': '" + val + "' is not an integer");
    return v;
}

// Applies config-file values to every option the user did not set explicitly
// and rejects unknown keys (typo protection).
class KvConfig {
public:
    void load(const std::string& path) { kv_ = read_kv_file(path); }

    void apply(const CLI::Option* opt, const std::string& key, double* target) {
        if (auto v = take(opt, key)) *target = parse_double(key, *v);
    }
    void apply(const CLI::Option* opt, const std::string& key, int* target) {
        if (auto v = take(opt, key)) {
            const long l = parse_long(key, *v);
            if (l < INT_MIN || l > INT_MAX)
                throw UsageError("config key '" + key + "': value out of range");
            *target = static_cast<int>(l);
        }
    }
    void apply(const CLI::Option* opt, const std::string& key, long* target) {
        if (auto v = take(opt, key)) *target = parse_long(key, *v);
    }
    void apply(const CLI::Option* opt, const std::string& key, std::string* target) {
        if (auto v = take(opt, key)) *target = *v;
    }
    void apply(const CLI::Option* opt, const std::string& key,
               std::vector<double>* target) {
        auto v = take(opt, key);
        if (!v) return;
        target->clear();
        std::stringstream ss(*v);
        std::string item;
        while (std::getline(ss, item, ','))
            target->push_back(parse_double(key, item));
        if (target->empty())
            throw UsageError("config key '" + key + "': empty list");
    }

    void finish() const {
        for (const auto& [k, v] : kv_)
            if (!consumed_.count(k))
                throw UsageError("config file: unknown key '" + k + "'");
    }

private:
    std::optional<std::string> take(const CLI::Option* opt, const std::string& key) {
        auto it = kv_.find(key);
        if (it == kv_.end()) return std::nullopt;
        consumed_.insert(key);
        if (opt != nullptr && opt->count() > 0) return std::nullopt; // flag wins
        return it->second;
    }

    std::map<std::string, std::string> kv_;
    std::set<std::string> consumed_;
};

// -------------------------------------------------------------- validation

void require(bool ok, const std::string& message) {
    if (!ok) throw UsageError(message);
}

int mode_code(const std::string& name) {
    if (name == "controlled2") return KDVBS_MODE_CONTROLLED2;
    if (name == "uncontrolled") return KDVBS_MODE_UNCONTROLLED;
    if (name == "controlled1") return KDVBS_MODE_CONTROLLED1;
    if (name == "nonlinear_controlled2") return KDVBS_MODE_NONLINEAR_CONTROLLED2;
    throw UsageError("unknown mode '" + name +
                     "' (expected controlled2 | uncontrolled | controlled1 | "
                     "nonlinear_controlled2)");
}

KernelHandle build_kernel(double lambda, double length, double tol, int n_max) {
    KernelHandle k;
    check(kdvbs_kernel_build(lambda, length, tol, n_max, &k.p));
    return k;
}

// ------------------------------------------------------------ subcommands

struct KernelParams {
    double lambda = 0.03;
    double length = kTwoPi;
    double tol = 1e-10;
    int n_max = 200;
    int grid = 256;
    std::string out;
};

void cmd_kernel(const KernelParams& p) {
    require(p.lambda > 0.0, "kernel: --lambda must be > 0");
    require(p.length > 0.0, "kernel: --length must be > 0");
    require(p.tol > 0.0, "kernel: --tol must be > 0");
    require(p.n_max >= 1, "kernel: --n-max must be >= 1");
    require(p.grid >= 8, "kernel: --grid must be >= 8");

    KernelHandle k = build_kernel(p.lambda, p.length, p.tol, p.n_max);
    int n_terms = 0;
    double tail = 0.0, dtail = 0.0, resid = 0.0;
    check(kdvbs_kernel_diag(k.p, &n_terms, &tail, &dtail, &resid));
    double alpha = 0.0, invnorm = 0.0, beta = 0.0;
    check(kdvbs_kernel_alpha(k.p, &alpha));
    check(kdvbs_kernel_invnorm(k.p, p.grid, &invnorm));
    check(kdvbs_kernel_beta(k.p, p.grid, &beta));

    std::ostringstream csv;
    csv << meta_line("kernel", {{"lambda", fmt(p.lambda)},
                                {"length", fmt(p.length)},
                                {"tol", fmt(p.tol)},
                                {"n_max", std::to_string(p.n_max)},
                                {"grid", std::to_string(p.grid)}});
    csv << "lambda,length,n_terms,tail_bound,deriv_tail_bound,residual_bound,"
           "alpha,invnorm,beta\n";
    csv << fmt(p.lambda) << ',' << fmt(p.length) << ',' << n_terms << ','
        << fmt(tail) << ',' << fmt(dtail) << ',' << fmt(resid) << ','
        << fmt(alpha) << ',' << fmt(invnorm) << ',' << fmt(beta) << '\n';
    emit(p.out, "decay.csv", csv.str());

    if (!p.out.empty()) {
        char* json = nullptr;
        check(kdvbs_kernel_json(k.p, &json));
        std::string text(json);
        kdvbs_string_free(json);
        text.push_back('\n');
        emit(p.out, "kernel.json", text, /*to_stdout=*/false);
    }
}

struct Table1Params {
    std::vector<double> lambdas{0.01, 0.02, 0.03, 0.04, 0.05, 0.10, 1.0};
    double length = kTwoPi;
    double tol = 1e-10;
    int n_max = 200;
    std::string out;
};

void cmd_table1(const Table1Params& p) {
    require(!p.lambdas.empty(), "table1: lambda list must not be empty");
    for (double l : p.lambdas) require(l > 0.0, "table1: all lambdas must be > 0");
    require(p.length > 0.0, "table1: --length must be > 0");
    require(p.tol > 0.0, "table1: --tol must be > 0");
    require(p.n_max >= 1, "table1: --n-max must be >= 1");

    std::string lam_list;
    for (size_t i = 0; i < p.lambdas.size(); ++i) {
        if (i) lam_list += ',';
        lam_list += fmt(p.lambdas[i]);
    }

    std::ostringstream csv;
    csv << meta_line("table1", {{"lambdas", lam_list},
                                {"length", fmt(p.length)},
                                {"tol", fmt(p.tol)},
                                {"n_max", std::to_string(p.n_max)}});
    csv << "lambda,alpha\n";
    for (double lambda : p.lambdas) {
        KernelHandle k = build_kernel(lambda, p.length, p.tol, p.n_max);
        double alpha = 0.0;
        check(kdvbs_kernel_alpha(k.p, &alpha));
        csv << fmt(lambda) << ',' << fmt(alpha) << '\n';
    }
    emit(p.out, "table1.csv", csv.str());
}

struct SimulateParams {
    double lambda = 0.03;
    double length = kTwoPi;
    double tol = 1e-10;
    int n_max = 200;
    int grid = 128;
    double dt = 1e-3;
    long steps = 1000;
    std::string mode = "controlled2";
    int m_succession = 50;
    std::string profile = "one_minus_cos";
    double amplitude = 1.0;
    int snapshots = 11;
    std::string out;
};

void cmd_simulate(const SimulateParams& p) {
    require(p.lambda >= 0.0, "simulate: --lambda must be >= 0");
    require(p.length > 0.0, "simulate: --length must be > 0");
    require(p.grid >= 8, "simulate: --grid must be >= 8");
    require(p.dt > 0.0, "simulate: --dt must be > 0");
    require(p.steps >= 1, "simulate: --steps must be >= 1");
    require(p.m_succession >= 1, "simulate: --m-succession must be >= 1");
    require(p.snapshots >= 2, "simulate: --snapshots must be >= 2");
    const int mode = mode_code(p.mode);

    KernelHandle k;
    if (mode != KDVBS_MODE_UNCONTROLLED) {
        require(p.lambda > 0.0, "simulate: controlled modes need --lambda > 0");
        k = build_kernel(p.lambda, p.length, p.tol, p.n_max);
    }

    kdvbs_sim_config cfg{};
    cfg.length = p.length;
    cfg.grid_J = p.grid;
    cfg.dt = p.dt;
    cfg.n_steps = p.steps;
    cfg.lambda = p.lambda;
    cfg.mode = mode;
    cfg.m_succession = p.m_succession;
    cfg.snapshot_count = p.snapshots;

    TraceHandle tr;
    check(kdvbs_simulate(&cfg, k.p, p.profile.c_str(), p.amplitude, &tr.p));

    const std::vector<std::pair<std::string, std::string>> meta = {
        {"lambda", fmt(p.lambda)},     {"length", fmt(p.length)},
        {"tol", fmt(p.tol)},           {"n_max", std::to_string(p.n_max)},
        {"grid", std::to_string(p.grid)}, {"dt", fmt(p.dt)},
        {"steps", std::to_string(p.steps)}, {"mode", p.mode},
        {"m_succession", std::to_string(p.m_succession)},
        {"profile", p.profile},        {"amplitude", fmt(p.amplitude)},
        {"snapshots", std::to_string(p.snapshots)}};

    std::ostringstream trace_csv;
    trace_csv << meta_line("simulate", meta);
    trace_csv << "t,energy,u_left_deriv,dirichlet_U,neumann_V\n";
    const size_t rows = kdvbs_trace_len(tr.p);
    for (size_t i = 0; i < rows; ++i) {
        double t = 0.0, e = 0.0, uld = 0.0, U = 0.0, V = 0.0;
        check(kdvbs_trace_row(tr.p, i, &t, &e, &uld, &U, &V));
        trace_csv << fmt(t) << ',' << fmt(e) << ',' << fmt(uld) << ','
                  << fmt(U) << ',' << fmt(V) << '\n';
    }
    emit(p.out, "trace.csv", trace_csv.str());

    if (!p.out.empty()) {
        std::ostringstream snap_csv;
        snap_csv << meta_line("simulate", meta);
        snap_csv << "snapshot,t,x,u\n";
        const size_t count = kdvbs_trace_snapshot_count(tr.p);
        std::vector<double> values(static_cast<size_t>(p.grid) + 1);
        const double dx = p.length / p.grid;
        for (size_t s = 0; s < count; ++s) {
            double t = 0.0;
            check(kdvbs_trace_snapshot(tr.p, s, &t, values.data(), values.size()));
            for (int j = 0; j <= p.grid; ++j)
                snap_csv << s << ',' << fmt(t) << ',' << fmt(j * dx) << ','
                         << fmt(values[static_cast<size_t>(j)]) << '\n';
        }
        emit(p.out, "snapshots.csv", snap_csv.str(), /*to_stdout=*/false);
    }
}

struct SpectralParams {
    double length = kTwoPi;
    int k_min = 1;
    int k_max = 20;
    double tol = 1e-9;
    std::string out;
};

void cmd_spectral(const SpectralParams& p) {
    require(p.length > 0.0, "spectral: --length must be > 0");
    require(p.k_min >= 1, "spectral: --k-min must be >= 1");
    require(p.k_max >= p.k_min, "spectral: --k-max must be >= --k-min");
    require(p.tol > 0.0, "spectral: --tol must be > 0");

    EigHandle l;
    check(kdvbs_spectral_solve(p.length, p.k_min, p.k_max, p.tol, &l.p));
    double abscissa = 0.0;
    check(kdvbs_spectral_abscissa(l.p, &abscissa));

    std::ostringstream csv;
    csv << meta_line("spectral", {{"length", fmt(p.length)},
                                  {"k_min", std::to_string(p.k_min)},
                                  {"k_max", std::to_string(p.k_max)},
                                  {"tol", fmt(p.tol)},
                                  {"abscissa", fmt(abscissa)}});
    csv << "k,re,im,residual,asymptotic_ratio\n";
    const size_t n = kdvbs_eig_count(l.p);
    for (size_t i = 0; i < n; ++i) {
        int k = 0;
        double re = 0.0, im = 0.0, resid = 0.0, ratio = 0.0;
        check(kdvbs_eig_get(l.p, i, &k, &re, &im, &resid, &ratio));
        csv << k << ',' << fmt(re) << ',' << fmt(im) << ',' << fmt(resid) << ','
            << fmt(ratio) << '\n';
    }
    emit(p.out, "spectral.csv", csv.str());
}

struct SweepParams {
    std::vector<double> lambdas{0.01, 0.02, 0.03, 0.04, 0.05};
    double length = kTwoPi;
    double tol = 1e-10;
    int n_max = 200;
    int grid = 128;
    double dt = 1e-3;
    long steps = 10000;
    std::string mode = "controlled2";
    int m_succession = 50;
    std::string profile = "one_minus_cos";
    double amplitude = 1.0;
    std::string out;
};

// Worker count: hardware concurrency capped by KDVBS_THREADS (if set) and by
// the number of jobs. Results land in per-job slots so output order is fixed.
size_t sweep_workers(size_t jobs) {
    size_t n = std::max<size_t>(1, std::thread::hardware_concurrency());
    if (const char* env = std::getenv("KDVBS_THREADS")) {
        const long cap = parse_long("KDVBS_THREADS", env);
        if (cap < 1) throw UsageError("KDVBS_THREADS must be a positive integer");
        n = std::min<size_t>(n, static_cast<size_t>(cap));
    }
    return std::min(n, jobs);
}

void cmd_sweep(const SweepParams& p) {
    require(!p.lambdas.empty(), "sweep: lambda list must not be empty");
    for (double l : p.lambdas) require(l > 0.0, "sweep: all lambdas must be > 0");
    require(p.length > 0.0, "sweep: --length must be > 0");
    require(p.grid >= 8, "sweep: --grid must be >= 8");
    require(p.dt > 0.0, "sweep: --dt must be > 0");
    require(p.steps >= 1, "sweep: --steps must be >= 1");
    require(p.m_succession >= 1, "sweep: --m-succession must be >= 1");
    const int mode = mode_code(p.mode);
    require(mode != KDVBS_MODE_UNCONTROLLED,
            "sweep: mode must be a controlled mode");

    struct Slot {
        double alpha = 0.0, beta = 0.0, rate = 0.0;
        kdvbs_status status = KDVBS_OK;
        std::string error;
    };
    std::vector<Slot> slots(p.lambdas.size());

    const double horizon = p.dt * static_cast<double>(p.steps);
    auto job = [&](size_t i) {
        Slot& s = slots[i];
        try {
            KernelHandle k = build_kernel(p.lambdas[i], p.length, p.tol, p.n_max);
            check(kdvbs_kernel_alpha(k.p, &s.alpha));
            check(kdvbs_kernel_beta(k.p, p.grid, &s.beta));

            kdvbs_sim_config cfg{};
            cfg.length = p.length;
            cfg.grid_J = p.grid;
            cfg.dt = p.dt;
            cfg.n_steps = p.steps;
            cfg.lambda = p.lambdas[i];
            cfg.mode = mode;
            cfg.m_succession = p.m_succession;
            cfg.snapshot_count = 2;
            TraceHandle tr;
            check(kdvbs_simulate(&cfg, k.p, p.profile.c_str(), p.amplitude, &tr.p));
            check(kdvbs_fit_decay_rate(tr.p, 0.2 * horizon, horizon, &s.rate));
        } catch (const ApiError& e) {
            s.status = e.status;
            s.error = e.what();
        } catch (const std::exception& e) {
            s.status = KDVBS_INTERNAL_ERROR;
            s.error = e.what();
        }
    };

    const size_t workers = sweep_workers(p.lambdas.size());
    std::vector<std::thread> pool;
    pool.reserve(workers);
    std::atomic<size_t> next{0};
    for (size_t w = 0; w < workers; ++w)
        pool.emplace_back([&] {
            for (size_t i = next.fetch_add(1); i < slots.size();
                 i = next.fetch_add(1))
                job(i);
        });
    for (auto& t : pool) t.join();

    for (size_t i = 0; i < slots.size(); ++i)
        if (slots[i].status != KDVBS_OK)
            throw ApiError(slots[i].status, "sweep: lambda=" + fmt(p.lambdas[i]) +
                                                ": " + slots[i].error);

    std::string lam_list;
    for (size_t i = 0; i < p.lambdas.size(); ++i) {
        if (i) lam_list += ',';
        lam_list += fmt(p.lambdas[i]);
    }
    std::ostringstream csv;
    csv << meta_line("sweep", {{"lambdas", lam_list},
                               {"length", fmt(p.length)},
                               {"tol", fmt(p.tol)},
                               {"n_max", std::to_string(p.n_max)},
                               {"grid", std::to_string(p.grid)},
                               {"dt", fmt(p.dt)},
                               {"steps", std::to_string(p.steps)},
                               {"mode", p.mode},
                               {"m_succession", std::to_string(p.m_succession)},
                               {"profile", p.profile},
                               {"amplitude", fmt(p.amplitude)},
                               {"fit_window", fmt(0.2 * horizon) + ":" + fmt(horizon)}});
    csv << "lambda,alpha,beta,fitted_rate\n";
    for (size_t i = 0; i < slots.size(); ++i)
        csv << fmt(p.lambdas[i]) << ',' << fmt(slots[i].alpha) << ','
            << fmt(slots[i].beta) << ',' << fmt(slots[i].rate) << '\n';
    emit(p.out, "sweep.csv", csv.str());
}

struct TransformCheckParams {
    double lambda = 0.03;
    double length = kTwoPi;
    double tol = 1e-10;
    int n_max = 200;
    int grid = 128;
    int m_succession = 0; // 0 = adaptive
    std::string out;
};

// Deterministic profile battery (no RNG anywhere; the round trip must hit the
// succession tolerance on every shape).
void cmd_transform_check(const TransformCheckParams& p) {
    require(p.lambda > 0.0, "transform-check: --lambda must be > 0");
    require(p.length > 0.0, "transform-check: --length must be > 0");
    require(p.grid >= 8, "transform-check: --grid must be >= 8");
    require(p.m_succession >= 0, "transform-check: --m-succession must be >= 0");

    constexpr double kCheckTol = 1e-8;
    using Profile = std::pair<const char*, std::function<double(double)>>;
    const std::vector<Profile> battery = {
        {"sine", [](double x) { return std::sin(2.0 * std::numbers::pi * x); }},
        {"two_mode",
         [](double x) {
             return std::sin(4.0 * std::numbers::pi * x) +
                    0.3 * std::sin(2.0 * std::numbers::pi * x);
         }},
        {"bump", [](double x) { return x * (1.0 - x); }},
        {"skew_bump", [](double x) { return x * x * (1.0 - x); }},
        {"gaussian", [](double x) { return std::exp(-50.0 * (x - 0.5) * (x - 0.5)); }},
        {"cos_well",
         [](double x) { return 1.0 - std::cos(2.0 * std::numbers::pi * x); }}};

    KernelHandle k = build_kernel(p.lambda, p.length, p.tol, p.n_max);

    std::ostringstream csv;
    csv << meta_line("transform-check",
                     {{"lambda", fmt(p.lambda)},
                      {"length", fmt(p.length)},
                      {"tol", fmt(p.tol)},
                      {"n_max", std::to_string(p.n_max)},
                      {"grid", std::to_string(p.grid)},
                      {"m_succession", std::to_string(p.m_succession)},
                      {"check_tol", fmt(kCheckTol)}});
    csv << "profile,rel_error,iterations\n";

    const size_t n = static_cast<size_t>(p.grid) + 1;
    std::vector<double> u(n), w(n), back(n);
    double worst = 0.0;
    for (const auto& [name, f] : battery) {
        for (int j = 0; j <= p.grid; ++j)
            u[static_cast<size_t>(j)] = f(static_cast<double>(j) / p.grid);
        check(kdvbs_transform_forward(k.p, p.grid, u.data(), w.data()));
        int iters = 0;
        check(kdvbs_transform_inverse(k.p, p.grid, w.data(), back.data(),
                                      p.m_succession, &iters));
        double num = 0.0, den = 0.0;
        for (size_t j = 0; j < n; ++j) {
            num = std::max(num, std::abs(back[j] - u[j]));
            den = std::max(den, std::abs(u[j]));
        }
        const double rel = num / den;
        worst = std::max(worst, rel);
        csv << name << ',' << fmt(rel) << ',' << iters << '\n';
    }
    emit(p.out, "transform_check.csv", csv.str());

    if (worst > kCheckTol)
        throw ApiError(KDVBS_NO_CONVERGENCE,
                       "transform-check: worst round-trip error " + fmt(worst) +
                           " exceeds " + fmt(kCheckTol));
}

// ------------------------------------------------------------------- wiring

void add_common_flags(CLI::App* sub, std::string* config_path) {
    sub->add_option("--config", *config_path,
                    "flat key=value config file; flags override it");
    sub->add_flag("--seed-free",
                  "reserved; all commands are deterministic (no RNG is used)");
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Pseudo-backstepping boundary feedback for the KdV equation"};
    app.set_version_flag("--version", kdvbs_version());
    app.require_subcommand(1);

    KernelParams kp;
    std::string kp_config;
    CLI::App* kernel = app.add_subcommand(
        "kernel", "build the pseudo-kernel and report decay rates");
    auto* kp_lambda = kernel->add_option("--lambda", kp.lambda, "decay parameter > 0");
    auto* kp_length = kernel->add_option("--length", kp.length, "domain length > 0");
    auto* kp_tol = kernel->add_option("--tol", kp.tol, "series truncation tolerance");
    auto* kp_nmax = kernel->add_option("--n-max", kp.n_max, "max series iterations");
    auto* kp_grid = kernel->add_option("--grid", kp.grid, "grid J for invnorm/beta");
    auto* kp_out = kernel->add_option("--out", kp.out, "output directory");
    add_common_flags(kernel, &kp_config);

    Table1Params tp;
    std::string tp_config;
    CLI::App* table1 = app.add_subcommand(
        "table1", "alpha across the standard lambda battery");
    auto* tp_lambdas = table1->add_option("--lambdas", tp.lambdas,
                                          "comma-separated lambda list")
                           ->delimiter(',');
    auto* tp_length = table1->add_option("--length", tp.length, "domain length > 0");
    auto* tp_tol = table1->add_option("--tol", tp.tol, "series truncation tolerance");
    auto* tp_nmax = table1->add_option("--n-max", tp.n_max, "max series iterations");
    auto* tp_out = table1->add_option("--out", tp.out, "output directory");
    add_common_flags(table1, &tp_config);

    SimulateParams sp;
    std::string sp_config;
    CLI::App* simulate = app.add_subcommand(
        "simulate", "implicit march of the plant or target system");
    auto* sp_lambda = simulate->add_option("--lambda", sp.lambda, "decay parameter");
    auto* sp_length = simulate->add_option("--length", sp.length, "domain length > 0");
    auto* sp_tol = simulate->add_option("--tol", sp.tol, "series truncation tolerance");
    auto* sp_nmax = simulate->add_option("--n-max", sp.n_max, "max series iterations");
    auto* sp_grid = simulate->add_option("--grid", sp.grid, "spatial intervals J");
    auto* sp_dt = simulate->add_option("--dt", sp.dt, "time step > 0");
    auto* sp_steps = simulate->add_option("--steps", sp.steps, "number of steps");
    auto* sp_mode = simulate->add_option(
        "--mode", sp.mode,
        "controlled2 | uncontrolled | controlled1 | nonlinear_controlled2");
    auto* sp_msucc = simulate->add_option("--m-succession", sp.m_succession,
                                          "succession sweeps per step");
    auto* sp_profile = simulate->add_option("--profile", sp.profile,
                                            "one_minus_cos | gaussian | zero");
    auto* sp_amp = simulate->add_option("--amplitude", sp.amplitude,
                                        "initial profile amplitude");
    auto* sp_snaps = simulate->add_option("--snapshots", sp.snapshots,
                                          "stored profiles (>= 2)");
    auto* sp_out = simulate->add_option("--out", sp.out, "output directory");
    add_common_flags(simulate, &sp_config);

    SpectralParams xp;
    std::string xp_config;
    CLI::App* spectral = app.add_subcommand(
        "spectral", "eigenvalues of the simplified boundary operator");
    auto* xp_length = spectral->add_option("--length", xp.length, "domain length > 0");
    auto* xp_kmin = spectral->add_option("--k-min", xp.k_min, "first index (>= 1)");
    auto* xp_kmax = spectral->add_option("--k-max", xp.k_max, "last index");
    auto* xp_tol = spectral->add_option("--tol", xp.tol, "determinant residual tol");
    auto* xp_out = spectral->add_option("--out", xp.out, "output directory");
    add_common_flags(spectral, &xp_config);

    SweepParams wp;
    std::string wp_config;
    CLI::App* sweep = app.add_subcommand(
        "sweep", "parallel lambda sweep: alpha, beta, fitted decay rate");
    auto* wp_lambdas = sweep->add_option("--lambdas", wp.lambdas,
                                         "comma-separated lambda list")
                           ->delimiter(',');
    auto* wp_length = sweep->add_option("--length", wp.length, "domain length > 0");
    auto* wp_tol = sweep->add_option("--tol", wp.tol, "series truncation tolerance");
    auto* wp_nmax = sweep->add_option("--n-max", wp.n_max, "max series iterations");
    auto* wp_grid = sweep->add_option("--grid", wp.grid, "spatial intervals J");
    auto* wp_dt = sweep->add_option("--dt", wp.dt, "time step > 0");
    auto* wp_steps = sweep->add_option("--steps", wp.steps, "number of steps");
    auto* wp_mode = sweep->add_option("--mode", wp.mode, "controlled mode name");
    auto* wp_msucc = sweep->add_option("--m-succession", wp.m_succession,
                                       "succession sweeps per step");
    auto* wp_profile = sweep->add_option("--profile", wp.profile, "initial profile");
    auto* wp_amp = sweep->add_option("--amplitude", wp.amplitude,
                                     "initial profile amplitude");
    auto* wp_out = sweep->add_option("--out", wp.out, "output directory");
    add_common_flags(sweep, &wp_config);

    TransformCheckParams cp;
    std::string cp_config;
    CLI::App* tcheck = app.add_subcommand(
        "transform-check", "forward/inverse round-trip battery");
    auto* cp_lambda = tcheck->add_option("--lambda", cp.lambda, "decay parameter > 0");
    auto* cp_length = tcheck->add_option("--length", cp.length, "domain length > 0");
    auto* cp_tol = tcheck->add_option("--tol", cp.tol, "series truncation tolerance");
    auto* cp_nmax = tcheck->add_option("--n-max", cp.n_max, "max series iterations");
    auto* cp_grid = tcheck->add_option("--grid", cp.grid, "spatial intervals J");
    auto* cp_msucc = tcheck->add_option("--m-succession", cp.m_succession,
                                        "succession sweeps (0 = adaptive)");
    auto* cp_out = tcheck->add_option("--out", cp.out, "output directory");
    add_common_flags(tcheck, &cp_config);

    try {
        app.parse(argc, argv);

        KvConfig cfg;
        if (kernel->parsed()) {
            if (!kp_config.empty()) cfg.load(kp_config);
            cfg.apply(kp_lambda, "lambda", &kp.lambda);
            cfg.apply(kp_length, "length", &kp.length);
            cfg.apply(kp_tol, "tol", &kp.tol);
            cfg.apply(kp_nmax, "n_max", &kp.n_max);
            cfg.apply(kp_grid, "grid", &kp.grid);
            cfg.apply(kp_out, "out", &kp.out);
            cfg.finish();
            cmd_kernel(kp);
        } else if (table1->parsed()) {
            if (!tp_config.empty()) cfg.load(tp_config);
            cfg.apply(tp_lambdas, "lambdas", &tp.lambdas);
            cfg.apply(tp_length, "length", &tp.length);
            cfg.apply(tp_tol, "tol", &tp.tol);
            cfg.apply(tp_nmax, "n_max", &tp.n_max);
            cfg.apply(tp_out, "out", &tp.out);
            cfg.finish();
            cmd_table1(tp);
        } else if (simulate->parsed()) {
            if (!sp_config.empty()) cfg.load(sp_config);
            cfg.apply(sp_lambda, "lambda", &sp.lambda);
            cfg.apply(sp_length, "length", &sp.length);
            cfg.apply(sp_tol, "tol", &sp.tol);
            cfg.apply(sp_nmax, "n_max", &sp.n_max);
            cfg.apply(sp_grid, "grid", &sp.grid);
            cfg.apply(sp_dt, "dt", &sp.dt);
            cfg.apply(sp_steps, "steps", &sp.steps);
            cfg.apply(sp_mode, "mode", &sp.mode);
            cfg.apply(sp_msucc, "m_succession", &sp.m_succession);
            cfg.apply(sp_profile, "profile", &sp.profile);
            cfg.apply(sp_amp, "amplitude", &sp.amplitude);
            cfg.apply(sp_snaps, "snapshots", &sp.snapshots);
            cfg.apply(sp_out, "out", &sp.out);
            cfg.finish();
            cmd_simulate(sp);
        } else if (spectral->parsed()) {
            if (!xp_config.empty()) cfg.load(xp_config);
            cfg.apply(xp_length, "length", &xp.length);
            cfg.apply(xp_kmin, "k_min", &xp.k_min);
            cfg.apply(xp_kmax, "k_max", &xp.k_max);
            cfg.apply(xp_tol, "tol", &xp.tol);
            cfg.apply(xp_out, "out", &xp.out);
            cfg.finish();
            cmd_spectral(xp);
        } else if (sweep->parsed()) {
            if (!wp_config.empty()) cfg.load(wp_config);
            cfg.apply(wp_lambdas, "lambdas", &wp.lambdas);
            cfg.apply(wp_length, "length", &wp.length);
            cfg.apply(wp_tol, "tol", &wp.tol);
            cfg.apply(wp_nmax, "n_max", &wp.n_max);
            cfg.apply(wp_grid, "grid", &wp.grid);
            cfg.apply(wp_dt, "dt", &wp.dt);
            cfg.apply(wp_steps, "steps", &wp.steps);
            cfg.apply(wp_mode, "mode", &wp.mode);
            cfg.apply(wp_msucc, "m_succession", &wp.m_succession);
            cfg.apply(wp_profile, "profile", &wp.profile);
            cfg.apply(wp_amp, "amplitude", &wp.amplitude);
            cfg.apply(wp_out, "out", &wp.out);
            cfg.finish();
            cmd_sweep(wp);
        } else if (tcheck->parsed()) {
            if (!cp_config.empty()) cfg.load(cp_config);
            cfg.apply(cp_lambda, "lambda", &cp.lambda);
            cfg.apply(cp_length, "length", &cp.length);
            cfg.apply(cp_tol, "tol", &cp.tol);
            cfg.apply(cp_nmax, "n_max", &cp.n_max);
            cfg.apply(cp_grid, "grid", &cp.grid);
            cfg.apply(cp_msucc, "m_succession", &cp.m_succession);
            cfg.apply(cp_out, "out", &cp.out);
            cfg.finish();
            cmd_transform_check(cp);
        }
        return 0;
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForVersion& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e); // prints the message
        return 2;
    } catch (const UsageError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    } catch (const IoError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 5;
    } catch (const ApiError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return exit_code_for(e.status);
    } catch (const std::exception& e) {
        std::fprintf(stderr, "internal error: %s\n", e.what());
        return 1;
    }
}
