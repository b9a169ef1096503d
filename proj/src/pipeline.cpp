#include "navfly/pipeline.hpp"

#include <cmath>

#include "navfly/errors.hpp"

namespace navfly::net {

namespace {

double mean_of_tail(const std::vector<double>& values, std::size_t skip) {
  if (values.size() <= skip) skip = values.empty() ? 0 : values.size() - 1;
  double sum = 0.0;
  std::size_t n = 0;
  for (std::size_t i = skip; i < values.size(); ++i) {
    sum += values[i];
    ++n;
  }
  return n > 0 ? sum / static_cast<double>(n) : 0.0;
}

}  // namespace

LatencyReport pipelined_execute(int n_frames, const StageFn& vision, const StageFn& llm,
                                const PipelineConfig& config, bool pipelined,
                                std::vector<double>* outputs) {
  if (n_frames < 1) throw ConfigError("pipelined_execute: n_frames must be >= 1");
  LatencyReport report;
  report.pipelined = pipelined;

  if (!pipelined) {
    // Both stages in one process: no IPC hop anywhere.
    const auto run_start = Clock::now();
    for (int i = 0; i < n_frames; ++i) {
      const auto t0 = Clock::now();
      double value = 0.0;
      try {
        value = llm(vision(static_cast<double>(i)));
      } catch (const std::exception& e) {
        report.aborted = true;
        report.error = e.what();
        break;
      }
      if (outputs) outputs->push_back(value);
      report.per_frame_latency_ms.push_back(
          std::chrono::duration<double, std::milli>(Clock::now() - t0).count());
    }
    report.frames = static_cast<int>(report.per_frame_latency_ms.size());
    if (report.frames > 0) {
      report.first_frame_latency_ms = report.per_frame_latency_ms.front();
      const std::size_t skip = report.frames > 10 ? 2 : 0;
      report.steady_state_mean_ms = mean_of_tail(report.per_frame_latency_ms, skip);
      const double total_s =
          std::chrono::duration<double>(Clock::now() - run_start).count();
      report.throughput_fps = total_s > 0.0 ? report.frames / total_s : 0.0;
    }
    return report;
  }

  TwoStagePipeline<double, double, double> pipeline(
      [&vision](const double& v) { return vision(v); },
      [&llm](const double& v) { return llm(v); }, config);

  std::thread feeder([&pipeline, n_frames] {
    for (int i = 0; i < n_frames; ++i) {
      if (!pipeline.push(static_cast<std::uint64_t>(i), static_cast<double>(i))) return;
    }
  });

  std::vector<PipelineResult<double>> results;
  results.reserve(static_cast<std::size_t>(n_frames));
  for (int i = 0; i < n_frames; ++i) {
    auto r = pipeline.pop();
    if (!r) break;
    if (r->failed) {
      report.aborted = true;
      report.error = r->error;
      break;
    }
    if (outputs) outputs->push_back(r->value);
    results.push_back(std::move(*r));
  }
  if (report.aborted) {
    // Keep the output side moving so upstream workers can drain, then tear
    // down; the frames completed before the failure are the report.
    std::thread drainer([&pipeline] {
      while (pipeline.pop()) {
      }
    });
    pipeline.stop();
    drainer.join();
    feeder.join();
  } else {
    feeder.join();
    pipeline.stop();
  }

  report.frames = static_cast<int>(results.size());
  if (results.empty()) return report;

  report.first_frame_latency_ms = std::chrono::duration<double, std::milli>(
                                      results.front().completed - results.front().vision_start)
                                      .count();
  report.per_frame_latency_ms.push_back(report.first_frame_latency_ms);
  for (std::size_t i = 1; i < results.size(); ++i) {
    const double gap_ms = std::chrono::duration<double, std::milli>(results[i].completed -
                                                                    results[i - 1].completed)
                              .count();
    report.per_frame_latency_ms.push_back(gap_ms + results[i].transfer_ms);
  }
  const std::size_t skip = results.size() > 20 ? 5 : (results.size() > 2 ? 1 : 0);
  report.steady_state_mean_ms = mean_of_tail(report.per_frame_latency_ms, skip);
  if (results.size() >= 2) {
    const double span_s = std::chrono::duration<double>(results.back().completed -
                                                        results.front().completed)
                              .count();
    if (span_s > 0.0) {
      report.throughput_fps = static_cast<double>(results.size() - 1) / span_s;
    }
  }
  return report;
}

nlohmann::json to_json(const LatencyReport& report) {
  nlohmann::json j{{"frames", report.frames},
                   {"pipelined", report.pipelined},
                   {"first_frame_latency_ms", report.first_frame_latency_ms},
                   {"steady_state_latency_ms", report.steady_state_mean_ms},
                   {"throughput_fps", report.throughput_fps},
                   {"aborted", report.aborted}};
  if (report.aborted) j["error"] = report.error;
  return j;
}

nlohmann::json bench_pipeline(const PipelineConfig& config, int n_frames) {
  const StageFn vision = [&config](double v) {
    sleep_ms(config.vision_latency_ms);
    return v;
  };
  const StageFn llm = [&config](double v) {
    sleep_ms(config.llm_latency_ms);
    return v;
  };
  const LatencyReport sequential = pipelined_execute(n_frames, vision, llm, config, false);
  const LatencyReport pipelined = pipelined_execute(n_frames, vision, llm, config, true);
  return nlohmann::json{{"config",
                         {{"vision_latency_ms", config.vision_latency_ms},
                          {"llm_latency_ms", config.llm_latency_ms},
                          {"ipc_overhead_ms", config.ipc_overhead_ms},
                          {"queue_capacity", config.queue_capacity},
                          {"frames", n_frames}}},
                        {"sequential", to_json(sequential)},
                        {"pipelined", to_json(pipelined)}};
}

}  // namespace navfly::net
