#include "dlsa/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <atomic>
#include <condition_variable>
#include <deque>
#include <exception>
#include <iomanip>
#include <mutex>
#include <sstream>
#include <thread>

#include "dlsa/errors.hpp"
#include "dlsa/ingest.hpp"
#include "dlsa/results.hpp"

namespace dlsa {
namespace {

// Worker to master message: an encoded envelope or the failure that replaced it.
struct Message {
  std::size_t slot = 0;
  wire::Bytes envelope;
  std::exception_ptr error;
};

template <typename T>
class Channel {
 public:
  void send(T value) {
    {
      std::lock_guard lock(mutex_);
      queue_.push_back(std::move(value));
    }
    ready_.notify_one();
  }
  T receive() {
    std::unique_lock lock(mutex_);
    ready_.wait(lock, [&] { return !queue_.empty(); });
    T value = std::move(queue_.front());
    queue_.pop_front();
    return value;
  }

 private:
  std::mutex mutex_;
  std::condition_variable ready_;
  std::deque<T> queue_;
};

unsigned resolve_threads(unsigned requested, std::size_t tasks) {
  unsigned t = requested != 0 ? requested : std::max(1u, std::thread::hardware_concurrency());
  return static_cast<unsigned>(std::clamp<std::size_t>(t, 1, std::max<std::size_t>(tasks, 1)));
}

[[noreturn]] void rethrow_for_partition(std::uint64_t id, const std::exception_ptr& error) {
  try {
    std::rethrow_exception(error);
  } catch (const PartitionFitError&) {
    throw;
  } catch (const NumericalError& e) {
    throw PartitionFitError(id, e.what());
  } catch (const InputError& e) {
    throw InputError("partition " + std::to_string(id) + ": " + e.what());
  }
}

void finish(PipelineResult& result, bool shrink) {
  result.fit = combine_wlse(result.summaries);
  result.os = combine_os(result.summaries);
  if (shrink) {
    const auto penalize = default_penalized(result.fit);
    result.path = lasso_path(result.fit, penalize);
    result.selection = dbic(*result.path, result.fit);
  }
}

std::vector<std::string> default_names(Eigen::Index p) {
  std::vector<std::string> names;
  for (Eigen::Index j = 1; j <= p; ++j) names.push_back("x" + std::to_string(j));
  return names;
}

}  // namespace

void RunConfig::validate() const {
  if (k == 0) throw ConfigError("K must be positive");
  if (out_dir.empty()) throw ConfigError("an output directory is required");
  if (std::holds_alternative<FileSource>(source)) {
    const auto& f = std::get<FileSource>(source);
    if (family.empty()) throw ConfigError("file mode needs a family");
    if (f.input.empty() || f.schema.empty()) throw ConfigError("file mode needs an input and a schema");
  } else {
    const auto& s = std::get<SimulateSource>(source).spec;
    s.validate();
    if (s.workers != k) throw ConfigError("scenario K differs from the run K");
  }
}

PipelineResult run_partitions(std::span<const DataPartition> partitions, const ModelFamily& family,
                              const PipelineOptions& options) {
  if (partitions.empty()) throw ConfigError("no partitions to fit");
  const std::size_t k = partitions.size();
  Channel<Message> channel;
  std::atomic<std::size_t> next{0};
  const auto worker = [&] {
    for (std::size_t i = next++; i < k; i = next++) {
      Message msg;
      msg.slot = i;
      try {
        partitions[i].validate(family);
        msg.envelope = wire::encode(fit_local(family, partitions[i]));
      } catch (...) {
        msg.error = std::current_exception();
      }
      channel.send(std::move(msg));
    }
  };

  PipelineResult result;
  result.family = family;
  std::vector<wire::Bytes> envelopes(k);
  std::vector<std::exception_ptr> errors(k);
  {
    std::vector<std::jthread> pool;
    const unsigned threads = resolve_threads(options.threads, k);
    for (unsigned t = 0; t < threads; ++t) pool.emplace_back(worker);
    for (std::size_t received = 0; received < k; ++received) {
      Message msg = channel.receive();
      if (msg.error) {
        errors[msg.slot] = msg.error;
        continue;
      }
      ++result.ledger.summary_messages;
      result.ledger.summary_bytes += msg.envelope.size();
      envelopes[msg.slot] = std::move(msg.envelope);
    }
  }
  for (std::size_t i = 0; i < k; ++i) {
    if (errors[i]) rethrow_for_partition(partitions[i].id(), errors[i]);
  }

  result.summaries.reserve(k);
  for (const auto& e : envelopes) result.summaries.push_back(wire::decode(e));
  result.envelopes = std::move(envelopes);
  finish(result, options.shrink);

  if (options.csl) {
    result.csl = combine_csl(result.summaries, partitions, family, resolve_threads(options.threads, k));
    result.ledger.gradient_messages = k;
    result.ledger.gradient_bytes =
        k * gradient_message_size(static_cast<std::size_t>(result.fit.theta_tilde.size()));
  }
  result.parameter_names =
      io::parameter_names(default_names(partitions.front().cols()), family.num_cutpoints());
  return result;
}

PipelineResult combine_summaries(std::vector<LocalSummary> summaries, bool shrink) {
  if (summaries.empty()) throw InputError("no summaries to combine");
  PipelineResult result;
  result.family = summaries.front().family();
  for (const auto& s : summaries) {
    ++result.ledger.summary_messages;
    result.ledger.summary_bytes += wire::encoded_size(static_cast<std::size_t>(s.q()));
  }
  result.summaries = std::move(summaries);
  finish(result, shrink);
  const auto p = result.fit.theta_tilde.coefficients.size();
  result.parameter_names = io::parameter_names(default_names(p), result.family.num_cutpoints());
  return result;
}

std::vector<LocalSummary> read_summaries(const std::filesystem::path& dir) {
  if (!std::filesystem::is_directory(dir)) throw InputError(dir.string() + " is not a directory");
  std::vector<std::filesystem::path> files;
  for (const auto& entry : std::filesystem::directory_iterator(dir)) {
    if (entry.is_regular_file() && entry.path().extension() == ".dlsa") files.push_back(entry.path());
  }
  std::sort(files.begin(), files.end());
  std::vector<LocalSummary> out;
  for (const auto& f : files) {
    try {
      out.push_back(wire::decode(wire::read_file(f)));
    } catch (const InputError& e) {
      throw InputError(f.filename().string() + ": " + e.what());
    }
  }
  if (out.empty()) throw InputError("no .dlsa envelopes in " + dir.string());
  std::sort(out.begin(), out.end(),
            [](const LocalSummary& a, const LocalSummary& b) { return a.partition_id() < b.partition_id(); });
  for (std::size_t i = 1; i < out.size(); ++i) {
    if (out[i].partition_id() == out[i - 1].partition_id()) {
      throw InputError("duplicate envelope for partition " + std::to_string(out[i].partition_id()));
    }
  }
  return out;
}

std::string summary_text(const PipelineResult& r) {
  std::ostringstream os;
  const auto& fit = r.fit;
  const auto q = static_cast<std::size_t>(fit.theta_tilde.size());
  os << "family: " << fit.family.name() << "\n";
  os << "N: " << fit.total_n << "\n";
  os << "K: " << fit.k << "\n";
  os << "q: " << q << "\n";
  os << "summary messages: " << r.ledger.summary_messages << "\n";
  os << "summary envelope bytes: " << wire::encoded_size(q) << "\n";
  os << "summary bytes: " << r.ledger.summary_bytes << "\n";
  if (r.ledger.gradient_messages > 0) {
    os << "gradient messages: " << r.ledger.gradient_messages << "\n";
    os << "gradient bytes: " << r.ledger.gradient_bytes << "\n";
  }
  os << "total messages: " << r.ledger.messages() << "\n";
  os << "total bytes: " << r.ledger.bytes() << "\n";
  if (fit.pseudo_inverse_used) os << "warning: combined precision was near-singular\n";
  os << "\n";

  const Eigen::VectorXd theta = fit.theta_tilde.stacked();
  const Eigen::VectorXd os_theta = r.os.stacked();
  std::size_t width = 9;
  for (const auto& n : r.parameter_names) width = std::max(width, n.size() + 2);
  os << std::left << std::setw(static_cast<int>(width)) << "parameter" << std::right
     << std::setw(14) << "DLSA" << std::setw(12) << "std.err" << std::setw(14) << "OS";
  if (r.csl) os << std::setw(14) << "CSL";
  if (r.selection) os << std::setw(14) << "SDLSA";
  os << "\n";
  os << std::fixed << std::setprecision(6);
  const double n = static_cast<double>(fit.total_n);
  for (std::size_t j = 0; j < q; ++j) {
    const auto jj = static_cast<Eigen::Index>(j);
    const std::string name = j < r.parameter_names.size() ? r.parameter_names[j] : std::to_string(j + 1);
    os << std::left << std::setw(static_cast<int>(width)) << name << std::right << std::setw(14)
       << theta(jj) << std::setw(12) << std::sqrt(fit.covariance(jj, jj) / n) << std::setw(14)
       << os_theta(jj);
    if (r.csl) os << std::setw(14) << r.csl->stacked()(jj);
    if (r.selection) os << std::setw(14) << r.selection->theta_selected(jj);
    os << "\n";
  }
  if (r.selection) {
    os << "\nselected support (1-based):";
    for (auto j : r.selection->support) os << " " << j + 1;
    os << "\nlambda0: " << std::defaultfloat << std::setprecision(10) << r.selection->chosen_lambda0
       << "\nDBIC: " << r.selection->dbic_min << "\nknots: " << r.path->knots.size() << "\n";
  }
  for (const auto& note : r.notes) os << "note: " << note << "\n";
  return os.str();
}

void write_outputs(const PipelineResult& r, const std::filesystem::path& out_dir) {
  std::filesystem::create_directories(out_dir);
  io::write_json(out_dir / "combined.json", io::combined_json(r.fit, r.parameter_names));
  if (r.path && r.selection) {
    io::write_json(out_dir / "path.json", io::path_json(*r.path, *r.selection));
    io::write_json(out_dir / "selection.json", io::selection_json(*r.selection, r.parameter_names));
  }
  io::write_text(out_dir / "summary.txt", summary_text(r));
  if (!r.envelopes.empty()) {
    const auto dir = out_dir / "summaries";
    std::filesystem::create_directories(dir);
    for (std::size_t i = 0; i < r.envelopes.size(); ++i) {
      const auto id = r.summaries[i].partition_id();
      wire::write_file(dir / ("partition_" + std::to_string(id) + ".dlsa"), r.envelopes[i]);
    }
  }
}

PipelineResult run_pipeline(const RunConfig& config) {
  config.validate();
  PipelineOptions options{config.shrink, config.csl, config.threads};
  PipelineResult result;
  if (const auto* file = std::get_if<FileSource>(&config.source)) {
    const auto schema = io::Schema::load(file->schema);
    std::optional<std::string> key;
    if (file->plan.strategy == io::PartitionStrategy::by_column) key = file->plan.key_column;
    const auto data = io::ingest_csv(file->input, schema, key);
    const auto family = ModelFamily::parse(config.family, data.ordinal_levels);
    if ((family.kind() == FamilyKind::cox) != data.survival()) {
      throw ConfigError("family " + config.family +
                        (data.survival() ? " does not take survival columns"
                                         : " needs survival-time and event columns"));
    }
    const auto q = family.num_params(data.covariates.cols());
    const auto parts = io::partition_input(data, config.k, file->plan, config.seed, q);
    result = run_partitions(parts, family, options);
    result.parameter_names = io::parameter_names(data.covariate_names, family.num_cutpoints());
    result.notes = data.notes;
  } else {
    const auto& src = std::get<SimulateSource>(config.source);
    const auto generated = sim::generate(src.spec, src.replication);
    result = run_partitions(generated.partitions, generated.truth.family, options);
  }
  write_outputs(result, config.out_dir);
  return result;
}

}  // namespace dlsa
