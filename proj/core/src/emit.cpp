#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>

#include "json.hpp"

#include "rsma/harness.hpp"

namespace rsma {

using json = nlohmann::ordered_json;

namespace {

std::string num(double v)
{
    if (std::isnan(v))
        return "nan";
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

int er_columns(const SweepResult& r)
{
    int k = 0;
    for (const SweepRow& row : r.rows)
        k = std::max(k, static_cast<int>(row.per_user_er.size()));
    return k;
}

std::vector<std::string> split(const std::string& s, char sep)
{
    std::vector<std::string> out;
    std::string cur;
    std::istringstream is(s);
    while (std::getline(is, cur, sep))
        out.push_back(cur);
    if (!s.empty() && s.back() == sep)
        out.emplace_back();
    return out;
}

double to_double(const std::string& s)
{
    if (s == "nan")
        return std::numeric_limits<double>::quiet_NaN();
    std::size_t pos = 0;
    const double v = std::stod(s, &pos);
    if (pos != s.size())
        throw std::invalid_argument("bad number: " + s);
    return v;
}

std::string to_csv(const SweepResult& r)
{
    const int K = er_columns(r);
    std::ostringstream os;
    os << "strategy,snr_db,alpha,esr";
    for (int k = 1; k <= K; ++k)
        os << ",er_" << k;
    os << ",iterations,seconds,feasible_uses,total_uses,unreliable,use_asr\n";
    for (const SweepRow& row : r.rows)
    {
        os << to_string(row.strategy) << ',' << num(row.snr_db) << ',' << num(row.alpha) << ','
           << num(row.esr);
        for (int k = 0; k < K; ++k)
            os << ',' << (k < row.per_user_er.size() ? num(row.per_user_er(k)) : "nan");
        os << ',' << num(row.iterations) << ',' << num(row.seconds) << ',' << row.feasible_uses
           << ',' << row.total_uses << ',' << (row.unreliable ? 1 : 0) << ',';
        for (std::size_t i = 0; i < row.use_asr.size(); ++i)
            os << (i ? ";" : "") << num(row.use_asr[i]);
        os << '\n';
    }
    return os.str();
}

SweepResult from_csv(const std::string& text)
{
    std::istringstream is(text);
    std::string line;
    if (!std::getline(is, line))
        throw std::invalid_argument("missing CSV header");
    const std::vector<std::string> header = split(line, ',');
    const int K = static_cast<int>(header.size()) - 10;
    if (K < 0 || header.front() != "strategy")
        throw std::invalid_argument("unexpected CSV header");
    SweepResult r;
    while (std::getline(is, line))
    {
        if (line.empty())
            continue;
        const std::vector<std::string> f = split(line, ',');
        if (f.size() != header.size())
            throw std::invalid_argument("CSV row width mismatch");
        SweepRow row;
        row.strategy = parse_strategy(f[0]);
        row.snr_db = to_double(f[1]);
        row.alpha = to_double(f[2]);
        row.esr = to_double(f[3]);
        row.per_user_er.resize(K);
        for (int k = 0; k < K; ++k)
            row.per_user_er(k) = to_double(f[static_cast<std::size_t>(4 + k)]);
        std::size_t i = static_cast<std::size_t>(4 + K);
        row.iterations = to_double(f[i++]);
        row.seconds = to_double(f[i++]);
        row.feasible_uses = std::stoi(f[i++]);
        row.total_uses = std::stoi(f[i++]);
        row.unreliable = f[i++] == "1";
        if (!f[i].empty())
            for (const std::string& v : split(f[i], ';'))
                row.use_asr.push_back(to_double(v));
        r.rows.push_back(std::move(row));
    }
    return r;
}

json nullable(double v) { return std::isnan(v) ? json(nullptr) : json(v); }

double from_nullable(const json& j)
{
    return j.is_null() ? std::numeric_limits<double>::quiet_NaN() : j.get<double>();
}

std::string to_json(const SweepResult& r)
{
    json rows = json::array();
    for (const SweepRow& row : r.rows)
    {
        json er = json::array();
        for (Eigen::Index k = 0; k < row.per_user_er.size(); ++k)
            er.push_back(row.per_user_er(k));
        json asr = json::array();
        for (double v : row.use_asr)
            asr.push_back(nullable(v));
        json o = json::object();
        o["strategy"] = to_string(row.strategy);
        o["snr_db"] = row.snr_db;
        o["alpha"] = row.alpha;
        o["esr"] = row.esr;
        o["per_user_er"] = er;
        o["iterations"] = row.iterations;
        o["seconds"] = row.seconds;
        o["feasible_uses"] = row.feasible_uses;
        o["total_uses"] = row.total_uses;
        o["unreliable"] = row.unreliable;
        o["use_asr"] = asr;
        rows.push_back(o);
    }
    json doc = json::object();
    doc["rows"] = rows;
    return doc.dump(2) + "\n";
}

SweepResult from_json(const std::string& text)
{
    const json doc = json::parse(text);
    SweepResult r;
    for (const json& o : doc.at("rows"))
    {
        SweepRow row;
        row.strategy = parse_strategy(o.at("strategy").get<std::string>());
        row.snr_db = o.at("snr_db").get<double>();
        row.alpha = o.at("alpha").get<double>();
        row.esr = o.at("esr").get<double>();
        const auto er = o.at("per_user_er").get<std::vector<double>>();
        row.per_user_er = Eigen::Map<const RVec>(er.data(), static_cast<Eigen::Index>(er.size()));
        row.iterations = o.at("iterations").get<double>();
        row.seconds = o.at("seconds").get<double>();
        row.feasible_uses = o.at("feasible_uses").get<int>();
        row.total_uses = o.at("total_uses").get<int>();
        row.unreliable = o.at("unreliable").get<bool>();
        for (const json& v : o.at("use_asr"))
            row.use_asr.push_back(from_nullable(v));
        r.rows.push_back(std::move(row));
    }
    return r;
}

template <class T>
void read_opt(const json& j, const char* key, T& out)
{
    if (j.contains(key))
        out = j.at(key).get<T>();
}

}  // namespace

ResultFormat parse_format(const std::string& name)
{
    if (name == "csv")
        return ResultFormat::Csv;
    if (name == "json")
        return ResultFormat::Json;
    throw std::invalid_argument("unknown format: " + name);
}

std::string format_results(const SweepResult& result, ResultFormat format)
{
    return format == ResultFormat::Csv ? to_csv(result) : to_json(result);
}

SweepResult parse_results(const std::string& text, ResultFormat format)
{
    return format == ResultFormat::Csv ? from_csv(text) : from_json(text);
}

void emit_results(const SweepResult& result, ResultFormat format, const std::string& path)
{
    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw std::runtime_error("cannot open " + path);
    out << format_results(result, format);
    if (!out)
        throw std::runtime_error("write failed: " + path);
}

ExperimentSpec parse_spec(const std::string& json_text)
{
    const json j = json::parse(json_text);
    ExperimentSpec s;
    SystemConfig& c = s.base;
    read_opt(j, "M", c.M);
    read_opt(j, "K", c.K);
    read_opt(j, "alpha", c.alpha);
    read_opt(j, "snr_db", c.snr_db);
    read_opt(j, "qos_alpha", c.qos_alpha);
    read_opt(j, "qos_zero", c.qos_zero);
    read_opt(j, "zero_user_snr_offset_db", c.zero_user_snr_offset_db);
    read_opt(j, "theta_zero", c.theta_zero);

    read_opt(j, "snr_sweep_db", s.snr_sweep_db);
    read_opt(j, "alpha_sweep", s.alpha_sweep);
    read_opt(j, "qos_alpha_by_snr", s.qos_alpha_by_snr);
    read_opt(j, "qos_zero_by_snr", s.qos_zero_by_snr);
    // "reference" interpolates the published threshold vectors onto the sweep.
    if (j.contains("qos_profile"))
    {
        const std::string p = j.at("qos_profile").get<std::string>();
        if (p == "reference" || p == "reference_high")
        {
            s.qos_zero_by_snr = interpolate(
                reference_qos_snr_db(),
                p == "reference" ? reference_qos_zero() : reference_qos_zero_high(), s.snr_sweep_db);
            s.qos_alpha_by_snr =
                interpolate(reference_qos_snr_db(), reference_qos_alpha(), s.snr_sweep_db);
        }
        else if (p == "reference_zero_only")
        {
            s.qos_zero_by_snr =
                interpolate(reference_qos_snr_db(), reference_qos_zero(), s.snr_sweep_db);
            s.qos_alpha_by_snr.assign(s.snr_sweep_db.size(), 0.0);
        }
        else if (p != "none")
        {
            throw std::invalid_argument("unknown qos_profile: " + p);
        }
    }
    if (j.contains("strategies"))
    {
        s.strategies.clear();
        for (const json& v : j.at("strategies"))
            s.strategies.push_back(parse_strategy(v.get<std::string>()));
    }
    read_opt(j, "t", s.t_channel_uses);
    read_opt(j, "n", s.n_samples);
    read_opt(j, "seed", s.seed);
    read_opt(j, "threads", s.threads);
    read_opt(j, "epsilon", s.ao.epsilon);
    read_opt(j, "max_iter", s.ao.max_iter);
    read_opt(j, "theta_step", s.ao.theta_step);
    if (j.value("paper_scale", false))
        s.apply_paper_scale();
    s.validate();
    return s;
}

ExperimentSpec load_spec(const std::string& path)
{
    std::ifstream in(path);
    if (!in)
        throw std::runtime_error("cannot open " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_spec(ss.str());
}

}  // namespace rsma
