#pragma once

#include <atomic>
#include <condition_variable>
#include <cstdint>
#include <deque>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <thread>
#include <variant>
#include <vector>

#include "deskservo/service.hpp"

namespace deskservo::service {

enum class SessionMode { Idle, CollectSpins, Wander, Autonomy };

std::string_view to_string(SessionMode mode);
std::optional<SessionMode> session_mode_from_string(std::string_view name);

/// Start pose and seeds shared by the CLI and the session so both produce
/// the same recordings.
sim::Pose2D wander_start_pose(const CameraModel& cam, const Geofence& fence);
std::uint64_t wander_seed(const Config& config);
sim::Pose2D spin_start_pose(const CameraModel& cam);

/// Immutable view published once per tick.
struct SessionSnapshot {
  SessionMode mode = SessionMode::Idle;
  std::uint64_t tick = 0;
  double time = 0.0;
  std::optional<PipelineTick> last_tick;
  std::optional<std::vector<ImagePoint>> fence;
  std::optional<std::vector<ImagePoint>> track;
  std::size_t wander_frames = 0;
  std::size_t labels = 0;
  std::optional<double> calibrated_spin_speed;
  std::size_t runs = 0;
  bool model_loaded = false;
  std::string last_error;
};

json snapshot_to_json(const SessionSnapshot& s);
/// Compact per-tick telemetry message.
json telemetry_to_json(const PipelineTick& tick, std::uint64_t run_id);

enum class ModeRequestResult { Accepted, MissingGeofence, MissingTrack, MissingModel };

/// Single owner of the simulated world. Front-end threads only enqueue
/// commands and read published snapshots; advance() runs on the owner.
class Session {
 public:
  using TelemetrySink = std::function<void(const std::string&)>;

  explicit Session(Config config, std::optional<estimator::Model> model = {});
  ~Session();

  // Front-end side (thread-safe).
  void submit_geofence(Geofence fence);
  void submit_track(ImageTrack track);
  /// Checks preconditions against the state after all queued commands and
  /// enqueues the switch when they hold.
  ModeRequestResult request_mode(SessionMode mode, const json& params = json::object());
  std::shared_ptr<const SessionSnapshot> snapshot() const;
  std::optional<RunRecord> run(std::uint64_t id) const;
  std::vector<std::uint8_t> frame_png() const;
  std::uint64_t subscribe(TelemetrySink sink);
  void unsubscribe(std::uint64_t id);

  // Owner side.
  /// Applies queued commands, then advances the active activity one tick.
  void advance();
  /// Advances until the session returns to IDLE with no pending commands.
  void run_until_idle(std::uint64_t max_ticks = 100'000'000);
  bool busy() const;

  const std::vector<data::WanderFrame>& wander_frames() const { return wander_log_; }
  const std::vector<data::SpinSession>& spin_sessions() const { return spin_sessions_; }

 private:
  struct SetFence { Geofence fence; };
  struct SetTrack { ImageTrack track; };
  struct SetMode { SessionMode mode; json params; };
  using Command = std::variant<SetFence, SetTrack, SetMode>;

  void apply(Command& cmd);
  void start_mode(SessionMode mode, const json& params);
  void finish_activity();
  void publish(const PipelineTick* tick);
  void emit(const std::string& message);

  Config config_;
  std::shared_ptr<const HeadingEstimator> learned_;

  mutable std::mutex queue_mutex_;
  std::deque<Command> queue_;
  // Preconditions as seen by the front-end (state after queued commands).
  bool pending_fence_ = false;
  bool pending_track_ = false;

  mutable std::mutex state_mutex_;  // guards everything below against readers
  sim::World world_;
  SessionMode mode_ = SessionMode::Idle;
  std::optional<Geofence> fence_;
  std::optional<ImageTrack> track_;
  std::unique_ptr<data::Wanderer> wanderer_;
  std::unique_ptr<AutonomyRun> autonomy_;
  std::vector<data::WanderFrame> wander_log_;
  std::vector<data::OrientationLabel> labels_;
  std::vector<data::SpinSession> spin_sessions_;
  std::optional<double> spin_speed_;
  std::map<std::uint64_t, RunRecord> runs_;
  std::uint64_t next_run_ = 0;
  std::uint64_t tick_ = 0;
  std::string last_error_;
  std::shared_ptr<const SessionSnapshot> snapshot_;

  mutable std::mutex sink_mutex_;
  std::map<std::uint64_t, TelemetrySink> sinks_;
  std::uint64_t next_sink_ = 0;
};

struct HttpResponse {
  int status = 200;
  std::string content_type = "application/json";
  std::string body;
};

/// HTTP routing for /api/v1, independent of any socket layer.
class ApiRouter {
 public:
  explicit ApiRouter(Session& session) : session_(session) {}
  HttpResponse handle(std::string_view method, std::string_view target,
                      std::string_view body = {});

 private:
  Session& session_;
};

/// Thread-per-connection HTTP/WebSocket front-end plus the owner loop.
class Server {
 public:
  Server(Session& session, const Config& config);
  ~Server();

  /// Binds and starts serving; port 0 picks an ephemeral port.
  void start(const std::string& address, unsigned short port);
  unsigned short port() const { return port_; }
  void stop();
  /// Blocks until stop() is called from another thread or a signal.
  void wait();

 private:
  void accept_loop();
  void owner_loop();

  struct Impl;
  std::unique_ptr<Impl> impl_;
  Session& session_;
  double tick_period_;
  unsigned short port_ = 0;
  std::atomic<bool> running_{false};
  std::thread acceptor_;
  std::thread owner_;
};

}  // namespace deskservo::service
